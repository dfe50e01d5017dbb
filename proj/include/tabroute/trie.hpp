#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tabroute/errors.hpp"
#include "tabroute/normalize.hpp"
#include "tabroute/table.hpp"

namespace tabroute {

enum class EntryKind { header, cell };

inline const char* to_string(EntryKind k) {
    return k == EntryKind::header ? "header" : "cell";
}

struct TokenMask {
    std::vector<bool> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t count_set() const {
        std::size_t n = 0;
        for (bool b : bits) n += b;
        return n;
    }
};

struct TrieOptions {
    bool include_headers = true;
    bool include_cells = true;
};

// One matched span of a reasoning step, for debug views.
struct MatchSpan {
    CharRange orig;      // char range in the original step text
    std::string entry;   // matched path, words joined by spaces
    EntryKind kind;
};

// Word-level trie over normalized table content. Immutable after build;
// concurrent reads are safe.
class TableTrie {
  public:
    TableTrie() { nodes_.emplace_back(); }

    void insert(std::string_view raw_entry, EntryKind kind) {
        NormalizedText norm = normalize(raw_entry);
        if (norm.text.empty()) return;
        auto words = split_words(norm.text);
        int cur = 0;
        for (const auto& w : words) {
            std::string key(match_key(w.text));
            auto it = nodes_[cur].children.find(key);
            if (it == nodes_[cur].children.end()) {
                nodes_.emplace_back();
                it = nodes_[cur].children.emplace(std::move(key), static_cast<int>(nodes_.size() - 1)).first;
            }
            cur = it->second;
        }
        if (!nodes_[cur].kind) {
            nodes_[cur].kind = kind; // first writer wins; re-insertion adds no duplicate path
        }
        max_depth_ = std::max(max_depth_, words.size());
    }

    bool contains_phrase(std::string_view raw) const {
        NormalizedText norm = normalize(raw);
        if (norm.text.empty()) return false;
        int cur = 0;
        for (const auto& w : split_words(norm.text)) {
            cur = child(cur, match_key(w.text));
            if (cur < 0) return false;
        }
        return nodes_[cur].kind.has_value();
    }

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& node : nodes_) n += node.kind.has_value();
        return n;
    }

    std::size_t max_depth() const { return max_depth_; }

    // Greedy left-to-right scan over the normalized words: at each position
    // the longest terminal path wins, the scan resumes past it, and a miss
    // advances one word. Returns matched spans in normalized coordinates.
    struct NormMatch {
        CharRange norm;
        std::size_t word_begin, word_end;
        std::string entry;
        EntryKind kind;
    };
    std::vector<NormMatch> scan(std::span<const NormWord> words) const {
        std::vector<NormMatch> matches;
        std::size_t pos = 0;
        while (pos < words.size()) {
            int cur = 0;
            std::size_t best_len = 0;
            std::optional<EntryKind> best_kind;
            for (std::size_t d = 0; pos + d < words.size(); ++d) {
                cur = child(cur, match_key(words[pos + d].text));
                if (cur < 0) break;
                if (nodes_[cur].kind) {
                    best_len = d + 1;
                    best_kind = nodes_[cur].kind;
                }
            }
            if (best_len == 0) {
                ++pos;
                continue;
            }
            NormMatch m;
            m.norm = {words[pos].range.begin, words[pos + best_len - 1].range.end};
            m.word_begin = pos;
            m.word_end = pos + best_len;
            for (std::size_t k = pos; k < pos + best_len; ++k) {
                if (k > pos) m.entry += ' ';
                m.entry += match_key(words[k].text);
            }
            m.kind = *best_kind;
            matches.push_back(std::move(m));
            pos += best_len;
        }
        return matches;
    }

  private:
    struct Node {
        std::map<std::string, int, std::less<>> children;
        std::optional<EntryKind> kind; // set iff a complete entry ends here
    };

    int child(int node, std::string_view key) const {
        auto it = nodes_[node].children.find(key);
        return it == nodes_[node].children.end() ? -1 : it->second;
    }

    std::vector<Node> nodes_;
    std::size_t max_depth_ = 0;
};

// Inserts every header and cell value after normalization; cells that
// normalize to the empty string are skipped.
inline TableTrie build_trie(const Table& table, const TrieOptions& opts = {}) {
    TableTrie trie;
    if (opts.include_headers) {
        for (const auto& h : table.headers) trie.insert(h, EntryKind::header);
    }
    if (opts.include_cells) {
        for (const auto& row : table.rows) {
            for (const auto& cell : row) trie.insert(cell, EntryKind::cell);
        }
    }
    return trie;
}

namespace detail {

inline void check_token_ranges(std::string_view step_text, std::span<const CharRange> token_ranges) {
    std::size_t expect = 0;
    for (std::size_t i = 0; i < token_ranges.size(); ++i) {
        const auto& r = token_ranges[i];
        if (r.begin != expect || r.end < r.begin) {
            throw input_error("token ranges must partition the step text in order (token " +
                              std::to_string(i) + ")");
        }
        expect = r.end;
    }
    if (expect != step_text.size()) {
        throw input_error("token ranges must cover the full step text");
    }
}

} // namespace detail

struct StepMatchResult {
    TokenMask mask;
    std::vector<MatchSpan> spans;
};

// Classifies each step token as table-grounded or free-text. A token counts
// as table-grounded when its char range overlaps any matched span projected
// back to the original text (any-overlap rule).
inline StepMatchResult match_step_detailed(const TableTrie& trie, std::string_view step_text,
                                           std::span<const CharRange> token_ranges) {
    detail::check_token_ranges(step_text, token_ranges);
    StepMatchResult result;
    result.mask.bits.assign(token_ranges.size(), false);

    NormalizedText norm = normalize(step_text);
    auto words = split_words(norm.text);
    for (const auto& m : trie.scan(words)) {
        CharRange orig = norm.project(m.norm);
        result.spans.push_back({orig, m.entry, m.kind});
        for (std::size_t t = 0; t < token_ranges.size(); ++t) {
            if (token_ranges[t].overlaps(orig)) result.mask.bits[t] = true;
        }
    }
    return result;
}

inline TokenMask match_step(const TableTrie& trie, std::string_view step_text,
                            std::span<const CharRange> token_ranges) {
    return match_step_detailed(trie, step_text, token_ranges).mask;
}

// Splits token indices by mask polarity. Both outputs preserve token order;
// together they cover every index exactly once.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
partition(std::size_t token_count, const TokenMask& mask) {
    if (mask.bits.size() != token_count) {
        throw input_error("mask length " + std::to_string(mask.bits.size()) +
                          " does not match token count " + std::to_string(token_count));
    }
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < token_count; ++i) {
        (mask.bits[i] ? out.first : out.second).push_back(i);
    }
    return out;
}

} // namespace tabroute
