#pragma once

// Shared builders for scripted steps, planted-risk fixtures and randomized
// (table, step) pairs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tabroute/backend.hpp"
#include "tabroute/evalharness.hpp"
#include "tabroute/pipeline.hpp"
#include "tabroute/risk.hpp"

namespace fixtures {

// Mapping under which two-outcome token distributions can plant any risk in
// about [0.10, 0.90]: risk = sigmoid(6.4 * phi - 2.2) with phi in [0, ln 2].
inline tabroute::RiskMapping planted_mapping(tabroute::Signal s) {
    tabroute::RiskMapping m;
    m.a = 6.4;
    m.b = -2.2;
    m.signal = s;
    return m;
}

// Inverse of the binary entropy function on (0, 1/2], by bisection.
inline double p_for_entropy(double h) {
    if (h <= 0.0) return 1e-15;
    double lo = 1e-15, hi = 0.5;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        double hm = -mid * std::log(mid) - (1.0 - mid) * std::log(1.0 - mid);
        (hm < h ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Entropy that the planted mapping sends to `risk`.
inline double entropy_for_risk(double risk, const tabroute::RiskMapping& m) {
    double logit = std::log(risk / (1.0 - risk));
    return (logit - m.b) / m.a;
}

// A step whose every token carries the two-outcome distribution with the
// planted entropy; with a table sharing no vocabulary, d_text == risk and
// d_tab is absent, so d_final == risk.
inline tabroute::GeneratedStep step_with_risk(double risk, const tabroute::RiskMapping& m,
                                              std::size_t n_tokens, tabroute::FinishReason finish,
                                              const std::string& answer = {}) {
    double h = entropy_for_risk(risk, m);
    double p = p_for_entropy(h);

    tabroute::GeneratedStep step;
    std::vector<std::string> words;
    for (std::size_t i = 0; i + 1 < n_tokens; ++i) words.push_back("filler" + std::to_string(i) + " ");
    if (finish == tabroute::FinishReason::answer) {
        words.push_back(answer.empty() ? "done" : "Final Answer is: \\boxed{" + answer + "}");
    } else {
        words.push_back("filler_last\n\n");
    }
    for (const auto& w : words) {
        tabroute::TokenSpan span{w, {step.text.size(), step.text.size() + w.size()}};
        step.text += w;
        step.tokens.push_back(span);
        tabroute::TokenDistribution d;
        d.full = true;
        d.entries = {{0, p}, {1, 1.0 - p}};
        d.coverage = 1.0;
        step.distributions.push_back(std::move(d));
    }
    step.finish = finish;
    step.validate();
    return step;
}

// Table whose vocabulary never collides with the planted filler words.
inline tabroute::Table unrelated_table() {
    tabroute::Table t;
    t.id = "unrelated";
    t.headers = {"city", "population"};
    t.rows = {{"quxopolis", "123456"}, {"zrbville", "987"}};
    return t;
}

inline tabroute::BackendConfig mock_config(std::int64_t params) {
    tabroute::BackendConfig c;
    c.kind = tabroute::BackendKind::mock;
    c.param_count = params;
    return c;
}

constexpr std::int64_t kSrmParams = 1'000'000'000;  // 1e9
constexpr std::int64_t kLrmParams = 8'000'000'000;  // 8e9

// Scripted query whose body steps carry planted risks and whose terminal step
// answers correctly only in the LRM variant when `srm_wrong` is set.
inline tabroute::DatasetQuery scripted_query(const std::string& id, const std::vector<double>& risks,
                                             const tabroute::RiskMapping& m, bool srm_wrong,
                                             std::size_t tokens_per_step = 4) {
    tabroute::DatasetQuery q;
    q.id = id;
    q.table = unrelated_table();
    q.table.id = id + "-table";
    q.question = "what is the planted answer?";
    q.answer = "42";

    tabroute::ScriptedQuery script;
    for (double r : risks) {
        tabroute::ScriptedQuery::Position pos;
        pos.srm = step_with_risk(r, m, tokens_per_step, tabroute::FinishReason::step_boundary);
        pos.lrm = pos.srm;
        script.positions.push_back(std::move(pos));
    }
    // terminal risk sits off the 0.05 grid so threshold ties cannot arise
    tabroute::ScriptedQuery::Position last;
    last.lrm = step_with_risk(0.52, m, tokens_per_step, tabroute::FinishReason::answer, "42");
    last.srm = srm_wrong
                   ? step_with_risk(0.52, m, tokens_per_step, tabroute::FinishReason::answer, "41")
                   : *last.lrm;
    script.positions.push_back(std::move(last));
    q.script = std::move(script);
    return q;
}

inline std::string dataset_to_jsonl(const std::vector<tabroute::DatasetQuery>& queries) {
    std::string out;
    for (const auto& q : queries) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& p : q.script->positions) {
            nlohmann::json pos;
            if (p.srm && p.lrm && tabroute::step_to_json(*p.srm) == tabroute::step_to_json(*p.lrm)) {
                pos["both"] = tabroute::step_to_json(*p.srm);
            } else {
                if (p.srm) pos["srm"] = tabroute::step_to_json(*p.srm);
                if (p.lrm) pos["lrm"] = tabroute::step_to_json(*p.lrm);
            }
            steps.push_back(pos);
        }
        nlohmann::json j{{"id", q.id},
                         {"table", tabroute::table_to_json(q.table)},
                         {"question", q.question},
                         {"answer", q.answer},
                         {"script", {{"steps", steps}}}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Randomized (table, step) generation for the oracle-equivalence suites
// ---------------------------------------------------------------------------

struct RandomCase {
    tabroute::Table table;
    std::string step_text;
    std::vector<tabroute::CharRange> token_ranges;
};

inline RandomCase random_case(std::mt19937_64& rng, std::size_t max_entries = 50,
                              std::size_t max_tokens = 200) {
    static const std::vector<std::string> vocab = {
        "new",  "york",   "1,200", "total", "games", "rank",  "2008", "elevation", "(m)",
        "7.5%", "city",   "won",   "lost",  "art",   "smart", "12.5", "alpha",     "beta",
        "county", "share", "Q4",   "—",     "n/a",   "de",    "la",   "100,000"};
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_int_distribution<int> entry_words(1, 3);
    std::uniform_int_distribution<int> coin(0, 1);

    RandomCase rc;
    std::uniform_int_distribution<std::size_t> n_cols_d(1, 4);
    std::size_t n_cols = n_cols_d(rng);
    std::size_t budget = 1 + rng() % max_entries;
    for (std::size_t c = 0; c < n_cols && rc.table.headers.size() < budget; ++c) {
        rc.table.headers.push_back(vocab[pick(rng)]);
    }
    if (rc.table.headers.empty()) rc.table.headers.push_back(vocab[pick(rng)]);
    while (rc.table.headers.size() + rc.table.rows.size() * rc.table.headers.size() + rc.table.headers.size() <= budget) {
        std::vector<std::string> row;
        for (std::size_t c = 0; c < rc.table.headers.size(); ++c) {
            std::string cell;
            int w = entry_words(rng);
            for (int i = 0; i < w; ++i) {
                if (i) cell += ' ';
                cell += vocab[pick(rng)];
            }
            if (coin(rng) && coin(rng)) cell = "  " + cell + " "; // stray whitespace
            row.push_back(cell);
        }
        rc.table.rows.push_back(std::move(row));
    }
    rc.table.id = "rand";

    std::uniform_int_distribution<std::size_t> n_words_d(1, 60);
    std::size_t n_words = n_words_d(rng);
    std::string text;
    for (std::size_t i = 0; i < n_words; ++i) {
        if (i) text += coin(rng) ? " " : "  ";
        std::string w = vocab[pick(rng)];
        if (coin(rng) && coin(rng)) w += ",";
        if (coin(rng) && coin(rng) && coin(rng)) w = "(" + w + ")";
        text += w;
    }
    rc.step_text = text;

    // random contiguous token chunks of 1..6 chars
    std::uniform_int_distribution<std::size_t> chunk(1, 6);
    std::size_t pos = 0;
    while (pos < text.size() && rc.token_ranges.size() + 1 < max_tokens) {
        std::size_t len = std::min(chunk(rng), text.size() - pos);
        rc.token_ranges.push_back({pos, pos + len});
        pos += len;
    }
    if (pos < text.size()) rc.token_ranges.push_back({pos, text.size()});
    return rc;
}

// Unique scratch directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        path = base / ("tabroute_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace fixtures
