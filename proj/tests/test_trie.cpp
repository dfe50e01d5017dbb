#include <doctest.h>

#include <chrono>
#include <random>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "tabroute/trie.hpp"

using namespace tabroute;

namespace {

std::vector<CharRange> char_tokens(const std::string& text, std::size_t width = 1) {
    std::vector<CharRange> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = std::min(text.size(), pos + width);
        out.push_back({pos, end});
        pos = end;
    }
    return out;
}

Table example_table() {
    Table t;
    t.id = "t";
    t.headers = {"Elevation (m)", "City"};
    t.rows = {{"2,306", "New York"}, {"1,200", "new"}};
    return t;
}

} // namespace

TEST_CASE("build_trie inserts headers and cells as complete normalized paths") {
    Table t = example_table();
    TableTrie trie = build_trie(t);
    CHECK(trie.contains_phrase("Elevation (m)"));
    CHECK(trie.contains_phrase("elevation (m)"));
    CHECK(trie.contains_phrase("New York"));
    CHECK(trie.contains_phrase("new  york"));
    CHECK(trie.contains_phrase("2306"));
    CHECK(trie.contains_phrase("2,306"));
    CHECK_FALSE(trie.contains_phrase("elevation"));  // prefix of an entry, not an entry
    CHECK_FALSE(trie.contains_phrase("boston"));
}

TEST_CASE("build_trie skips cells that normalize to nothing") {
    Table t;
    t.headers = {"h one", "h two"};
    t.rows = {{" ", "\t \n"}};
    TableTrie trie = build_trie(t);
    CHECK(trie.entry_count() == 2);
    CHECK(trie.contains_phrase("h one"));
    CHECK(trie.contains_phrase("h two"));
}

TEST_CASE("build_trie membership matches a linear-scan oracle on random tables") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 50; ++i) {
        auto rc = fixtures::random_case(rng);
        TableTrie trie = build_trie(rc.table);
        for (const auto& h : rc.table.headers) {
            if (!normalize(h).text.empty()) CHECK(trie.contains_phrase(h));
        }
        for (const auto& row : rc.table.rows) {
            for (const auto& cell : row) {
                if (!normalize(cell).text.empty()) CHECK(trie.contains_phrase(cell));
            }
        }
    }
}

TEST_CASE("match_step prefers the longest span") {
    Table t;
    t.headers = {"x"};
    t.rows = {{"new"}, {"new york"}};
    TableTrie trie = build_trie(t);

    std::string step = "founded in new york in 1898";
    auto ranges = char_tokens(step, 3);
    auto res = match_step_detailed(trie, step, ranges);
    REQUIRE(res.spans.size() == 1);
    CHECK(res.spans[0].entry == "new york");
    CHECK(step.substr(res.spans[0].orig.begin, res.spans[0].orig.end - res.spans[0].orig.begin) ==
          "new york");

    // tokens covering "new york" are set, everything else clear
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        bool in_span = ranges[i].overlaps(res.spans[0].orig);
        CHECK(res.mask.bits[i] == in_span);
    }
    CHECK(res.mask.count_set() > 0);
}

TEST_CASE("match_step returns an all-zero mask when no vocabulary is shared") {
    Table t = example_table();
    TableTrie trie = build_trie(t);
    std::string step = "completely unrelated words here";
    auto ranges = char_tokens(step, 4);
    TokenMask mask = match_step(trie, step, ranges);
    CHECK(mask.count_set() == 0);
    CHECK(mask.size() == ranges.size());
}

TEST_CASE("match_step rejects malformed token ranges") {
    TableTrie trie = build_trie(example_table());
    std::string step = "abcdef";
    std::vector<CharRange> gap = {{0, 2}, {3, 6}};
    CHECK_THROWS_AS(match_step(trie, step, gap), input_error);
    std::vector<CharRange> overlap = {{0, 3}, {2, 6}};
    CHECK_THROWS_AS(match_step(trie, step, overlap), input_error);
    std::vector<CharRange> incomplete = {{0, 3}};
    CHECK_THROWS_AS(match_step(trie, step, incomplete), input_error);
}

TEST_CASE("punctuation around words matches but numbers with separators unify") {
    Table t;
    t.headers = {"City"};
    t.rows = {{"new york"}, {"1,200"}};
    TableTrie trie = build_trie(t);

    std::string step = "moved to (New York), paid 1200 dollars";
    auto ranges = char_tokens(step, 2);
    auto res = match_step_detailed(trie, step, ranges);
    REQUIRE(res.spans.size() == 2);
    CHECK(res.spans[0].entry == "new york");
    CHECK(res.spans[1].entry == "1200");
}

TEST_CASE("word-boundary rule: entries do not match inside longer words") {
    Table t;
    t.headers = {"x"};
    t.rows = {{"art"}};
    TableTrie trie = build_trie(t);
    std::string step = "a smart art piece";
    auto ranges = char_tokens(step, 1);
    auto res = match_step_detailed(trie, step, ranges);
    REQUIRE(res.spans.size() == 1);
    CHECK(step.substr(res.spans[0].orig.begin, res.spans[0].orig.end - res.spans[0].orig.begin) == "art");
    // "smart" tokens stay unmasked
    std::size_t smart_at = step.find("smart");
    for (std::size_t i = smart_at; i < smart_at + 5; ++i) CHECK_FALSE(res.mask.bits[i]);
}

TEST_CASE("partition splits indices exhaustively and disjointly") {
    TokenMask mask;
    mask.bits = {true, false, true};
    auto [tab, text] = partition(3, mask);
    CHECK(tab == std::vector<std::size_t>{0, 2});
    CHECK(text == std::vector<std::size_t>{1});

    TokenMask ones;
    ones.bits = {true, true};
    auto [tab2, text2] = partition(2, ones);
    CHECK(tab2.size() == 2);
    CHECK(text2.empty());

    CHECK_THROWS_AS(partition(5, mask), input_error);
}

TEST_CASE("partition exactness on random masks") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> coin(0, 1);
    TokenMask mask;
    for (int i = 0; i < 64; ++i) mask.bits.push_back(coin(rng) != 0);
    auto [tab, text] = partition(64, mask);
    CHECK(tab.size() + text.size() == 64);
    std::vector<bool> seen(64, false);
    for (auto i : tab) {
        CHECK_FALSE(seen[i]);
        seen[i] = true;
    }
    for (auto i : text) {
        CHECK_FALSE(seen[i]);
        seen[i] = true;
    }
    for (bool b : seen) CHECK(b);
}

TEST_CASE("match_step equals the brute-force substring oracle on 1000 random pairs") {
    std::mt19937_64 rng(2024);
    auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) {
        auto rc = fixtures::random_case(rng);
        TableTrie trie = build_trie(rc.table);
        TokenMask got = match_step(trie, rc.step_text, rc.token_ranges);
        TokenMask want = oracle::brute_force_mask(rc.table, rc.step_text, rc.token_ranges);
        REQUIRE(got.bits == want.bits);
    }
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed < 10.0);
}

TEST_CASE("masked tokens always lie inside spans whose normalized form is an entry") {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
        auto rc = fixtures::random_case(rng);
        TableTrie trie = build_trie(rc.table);
        auto res = match_step_detailed(trie, rc.step_text, rc.token_ranges);
        for (std::size_t t = 0; t < rc.token_ranges.size(); ++t) {
            if (!res.mask.bits[t]) continue;
            bool covered = false;
            for (const auto& span : res.spans) {
                if (rc.token_ranges[t].overlaps(span.orig)) {
                    covered = true;
                    CHECK(trie.contains_phrase(span.entry));
                }
            }
            CHECK(covered);
        }
    }
}
