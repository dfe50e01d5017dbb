#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabroute {

struct CharRange {
    std::size_t begin = 0;
    std::size_t end = 0; // half-open

    bool overlaps(const CharRange& other) const {
        return begin < other.end && other.begin < end;
    }
    bool operator==(const CharRange&) const = default;
};

// One piece of the normalized-to-original mapping. norm ranges of consecutive
// segments are contiguous and cover the whole normalized string; segments
// whose normalized range is empty record deleted input (collapsed whitespace
// tails, dropped thousands separators).
struct OffsetSegment {
    CharRange norm;
    CharRange orig;
};

struct NormalizedText {
    std::string text;
    std::vector<OffsetSegment> offset_map;

    // Projects a normalized char range back onto the original string.
    // Empty ranges project to an empty range at the matching original position.
    CharRange project(CharRange norm_range) const {
        if (norm_range.begin >= norm_range.end || offset_map.empty()) return {0, 0};
        std::size_t ob = 0, oe = 0;
        bool found_begin = false;
        for (const auto& seg : offset_map) {
            if (seg.norm.begin >= seg.norm.end) continue;
            if (!found_begin && norm_range.begin < seg.norm.end) {
                ob = seg.orig.begin;
                found_begin = true;
            }
            if (norm_range.end > seg.norm.begin) oe = seg.orig.end;
            if (seg.norm.begin >= norm_range.end) break;
        }
        return {ob, oe};
    }
};

namespace detail {

// UTF-8 punctuation variants folded to canonical ASCII before matching.
// Returns the replacement and consumes `len` input bytes, or nullptr when the
// sequence is not a known variant.
inline const char* punct_variant(std::string_view in, std::size_t pos, std::size_t& len) {
    struct Mapping {
        std::string_view from;
        const char* to;
    };
    static constexpr Mapping kMappings[] = {
        {"\xE2\x80\x93", "-"},   // en dash
        {"\xE2\x80\x94", "-"},   // em dash
        {"\xE2\x80\x92", "-"},   // figure dash
        {"\xE2\x80\x90", "-"},   // hyphen
        {"\xE2\x88\x92", "-"},   // minus sign
        {"\xE2\x80\x98", "'"},   // left single quote
        {"\xE2\x80\x99", "'"},   // right single quote
        {"\xE2\x80\x9C", "\""},  // left double quote
        {"\xE2\x80\x9D", "\""},  // right double quote
        {"\xE2\x80\xA6", "..."}, // ellipsis
        {"\xC2\xB7", "."},       // middle dot
    };
    for (const auto& m : kMappings) {
        if (in.substr(pos, m.from.size()) == m.from) {
            len = m.from.size();
            return m.to;
        }
    }
    return nullptr;
}

inline bool is_space_at(std::string_view in, std::size_t pos, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(in[pos]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        len = 1;
        return true;
    }
    if (in.substr(pos, 2) == "\xC2\xA0") { // no-break space
        len = 2;
        return true;
    }
    return false;
}

} // namespace detail

// Canonicalizes text for trie insertion and step matching: lowercase, runs of
// whitespace collapsed to one space, no leading/trailing whitespace, digit-
// flanked thousands commas dropped, punctuation variants folded to ASCII.
// Decimal points and '%' pass through unchanged. Total over all inputs, and
// idempotent: normalize(normalize(x).text).text == normalize(x).text.
inline NormalizedText normalize(std::string_view raw) {
    NormalizedText out;
    out.text.reserve(raw.size());

    auto emit = [&out](std::string_view chars, std::size_t ob, std::size_t oe) {
        std::size_t nb = out.text.size();
        out.text.append(chars);
        out.offset_map.push_back({{nb, out.text.size()}, {ob, oe}});
    };

    std::size_t i = 0;
    bool pending_space = false;   // saw whitespace; emit one space before next visible char
    std::size_t ws_begin = 0;     // original start of the pending whitespace run
    while (i < raw.size()) {
        std::size_t len = 1;
        if (detail::is_space_at(raw, i, len)) {
            if (!pending_space) {
                pending_space = true;
                ws_begin = i;
            }
            i += len;
            continue;
        }
        if (pending_space) {
            if (!out.text.empty()) emit(" ", ws_begin, i);
            pending_space = false;
        }
        // thousands separator: comma with digits on both sides
        if (raw[i] == ',' && i > 0 && i + 1 < raw.size() &&
            std::isdigit(static_cast<unsigned char>(raw[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(raw[i + 1]))) {
            out.offset_map.push_back({{out.text.size(), out.text.size()}, {i, i + 1}});
            ++i;
            continue;
        }
        if (const char* repl = detail::punct_variant(raw, i, len)) {
            emit(repl, i, i + len);
            i += len;
            continue;
        }
        char c = raw[i];
        if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        emit(std::string_view(&c, 1), i, i + 1);
        ++i;
    }
    return out;
}

// Words are whitespace-delimited chunks of the normalized string.
struct NormWord {
    std::string_view text; // view into NormalizedText::text
    CharRange range;       // normalized char range
};

inline std::vector<NormWord> split_words(const std::string& normalized) {
    std::vector<NormWord> words;
    std::size_t i = 0;
    while (i < normalized.size()) {
        if (normalized[i] == ' ') {
            ++i;
            continue;
        }
        std::size_t j = normalized.find(' ', i);
        if (j == std::string::npos) j = normalized.size();
        words.push_back({std::string_view(normalized).substr(i, j - i), {i, j}});
        i = j;
    }
    return words;
}

// Key used for trie children and lookups: the word with surrounding
// delimiter punctuation stripped. Punctuation that carries value semantics
// ('%', '$', '-', '+', '/', '#', '&') is kept. A word that strips to nothing
// (e.g. a bare "-") keys as itself.
inline std::string_view match_key(std::string_view word) {
    static constexpr std::string_view kStrip = ".,;:!?\"'()[]{}`";
    std::size_t b = 0, e = word.size();
    while (b < e && kStrip.find(word[b]) != std::string_view::npos) ++b;
    while (e > b && kStrip.find(word[e - 1]) != std::string_view::npos) --e;
    if (b == e) return word;
    return word.substr(b, e - b);
}

} // namespace tabroute
