#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabroute/backend.hpp"
#include "tabroute/calibration.hpp"
#include "tabroute/errors.hpp"
#include "tabroute/http_backend.hpp"
#include "tabroute/io.hpp"
#include "tabroute/pipeline.hpp"

namespace tabroute {

// ---------------------------------------------------------------------------
// Answer scoring: normalized exact match with numeric tolerance
// ---------------------------------------------------------------------------

namespace detail {

inline std::optional<double> parse_number(const std::string& s) {
    std::string cleaned;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == ',' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
            std::isdigit(static_cast<unsigned char>(s[i + 1])))
            continue; // thousands separator
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        cleaned += c;
    }
    if (!cleaned.empty() && (cleaned.back() == '%' || cleaned.front() == '$')) {
        if (cleaned.back() == '%') cleaned.pop_back();
        if (!cleaned.empty() && cleaned.front() == '$') cleaned.erase(cleaned.begin());
    }
    if (cleaned.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(cleaned.c_str(), &end);
    if (end != cleaned.c_str() + cleaned.size()) return std::nullopt;
    return v;
}

inline std::string squash(const std::string& s) {
    std::string out;
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isspace(u) || std::ispunct(u)) continue;
        out += static_cast<char>(std::tolower(u));
    }
    return out;
}

} // namespace detail

// Numeric answers compare with relative tolerance 1e-6; everything else falls
// back to case-, punctuation- and whitespace-insensitive exact match.
inline bool answer_match(const std::string& predicted, const std::string& gold) {
    auto pn = detail::parse_number(predicted);
    auto gn = detail::parse_number(gold);
    if (pn && gn) {
        double scale = std::max({1.0, std::fabs(*pn), std::fabs(*gn)});
        return std::fabs(*pn - *gn) <= 1e-6 * scale;
    }
    return detail::squash(predicted) == detail::squash(gold);
}

// ---------------------------------------------------------------------------
// Datasets: {id, table, question, answer}, optionally with a per-query
// positional script for mock evaluation
// ---------------------------------------------------------------------------

// Steps addressed by position: the backend serving step i returns the variant
// for its role, regardless of which model produced earlier steps. Lets one
// fixture serve every threshold in a sweep.
struct ScriptedQuery {
    struct Position {
        std::optional<GeneratedStep> srm;
        std::optional<GeneratedStep> lrm;
    };
    std::vector<Position> positions;
};

struct DatasetQuery {
    std::string id;
    Table table;
    std::string question;
    std::string answer;
    std::optional<ScriptedQuery> script;
};

class PositionalScriptBackend : public StepBackend {
  public:
    PositionalScriptBackend(ScriptedQuery script, ModelChoice role, BackendConfig config)
        : script_(std::move(script)), role_(role), config_(std::move(config)) {
        config_.kind = BackendKind::mock;
        config_.validate();
    }

    GeneratedStep generate_step(const StepContext& ctx) override {
        std::size_t pos = ctx.prior_steps.size();
        if (pos >= script_.positions.size()) {
            throw fixture_exhausted_error("scripted query has no step at position " +
                                          std::to_string(pos + 1));
        }
        const auto& p = script_.positions[pos];
        const std::optional<GeneratedStep>& variant = role_ == ModelChoice::SRM ? p.srm : p.lrm;
        if (!variant) {
            throw fixture_exhausted_error("scripted query lacks a " +
                                          std::string(to_string(role_)) + " variant at position " +
                                          std::to_string(pos + 1));
        }
        return *variant;
    }

    const BackendConfig& config() const override { return config_; }

  private:
    ScriptedQuery script_;
    ModelChoice role_;
    BackendConfig config_;
};

inline DatasetQuery dataset_query_from_json(const nlohmann::json& j) {
    DatasetQuery q;
    try {
        q.id = j.at("id").get<std::string>();
        q.table = table_from_json(j.at("table"));
        if (q.table.id.empty()) q.table.id = q.id;
        q.question = j.at("question").get<std::string>();
        q.answer = j.at("answer").get<std::string>();
        if (j.contains("script") && !j.at("script").is_null()) {
            ScriptedQuery script;
            for (const auto& pos : j.at("script").at("steps")) {
                ScriptedQuery::Position p;
                if (pos.contains("both")) {
                    p.srm = step_from_json(pos.at("both"));
                    p.lrm = p.srm;
                } else {
                    if (pos.contains("srm")) p.srm = step_from_json(pos.at("srm"));
                    if (pos.contains("lrm")) p.lrm = step_from_json(pos.at("lrm"));
                }
                script.positions.push_back(std::move(p));
            }
            q.script = std::move(script);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed dataset entry: ") + e.what());
    }
    return q;
}

inline std::vector<DatasetQuery> dataset_from_jsonl(const std::string& content) {
    std::vector<DatasetQuery> queries;
    for_each_jsonl_line(content, [&](std::size_t line_no, const std::string& line) {
        try {
            queries.push_back(dataset_query_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw parse_error("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return queries;
}

// ---------------------------------------------------------------------------
// Scoring modes (ablation structure: fusion replacements selectable per sweep)
// ---------------------------------------------------------------------------

enum class ScoreMode {
    noisy_or,      // default: calibrated risks fused by Noisy-OR
    average_token, // single pooled-entropy signal through one mapping
    table_only,
    text_only,
    linear_weight, // w*d_tab + (1-w)*d_text
    random,        // seeded uniform score; tau-free control
};

inline const char* to_string(ScoreMode m) {
    switch (m) {
        case ScoreMode::noisy_or: return "noisy_or";
        case ScoreMode::average_token: return "average_token";
        case ScoreMode::table_only: return "table_only";
        case ScoreMode::text_only: return "text_only";
        case ScoreMode::linear_weight: return "linear_weight";
        case ScoreMode::random: return "random";
    }
    return "?";
}

inline ScoreMode score_mode_from_string(const std::string& s) {
    for (ScoreMode m : {ScoreMode::noisy_or, ScoreMode::average_token, ScoreMode::table_only,
                        ScoreMode::text_only, ScoreMode::linear_weight, ScoreMode::random}) {
        if (s == to_string(m)) return m;
    }
    throw parse_error("unknown score mode: " + s);
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double uniform_unit(std::uint64_t key) {
    return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

} // namespace detail

// Builds the pluggable final-score function for one query run. The default
// mode returns an empty function, which selects the pipeline's Noisy-OR path.
inline FinalScorer make_scorer(ScoreMode mode, const RunConfig& run_cfg, double linear_w,
                               const std::optional<RiskMapping>& mapping_all,
                               std::uint64_t random_key) {
    switch (mode) {
        case ScoreMode::noisy_or:
            return {};
        case ScoreMode::average_token: {
            RiskMapping m = mapping_all ? *mapping_all : run_cfg.mapping_text;
            return [m](const ScoreInputs& in) {
                double sum = 0.0;
                for (double e : in.entropies) sum += e;
                double phi = in.entropies.empty() ? 0.0 : sum / static_cast<double>(in.entropies.size());
                return apply_mapping(m, phi);
            };
        }
        case ScoreMode::table_only:
            return [](const ScoreInputs& in) { return in.d_tab.value_or(0.0); };
        case ScoreMode::text_only:
            return [](const ScoreInputs& in) { return in.d_text.value_or(0.0); };
        case ScoreMode::linear_weight:
            return [linear_w](const ScoreInputs& in) {
                return linear_w * in.d_tab.value_or(0.0) + (1.0 - linear_w) * in.d_text.value_or(0.0);
            };
        case ScoreMode::random:
            return [random_key](const ScoreInputs& in) {
                return detail::uniform_unit(random_key ^ (0x5bd1e995ULL * in.step_index));
            };
    }
    return {};
}

// ---------------------------------------------------------------------------
// Threshold sweep
// ---------------------------------------------------------------------------

struct SweepConfig {
    RunConfig run;        // tau is overwritten per grid row
    double spacing = 0.05;
    int runs = 3;         // independent repetitions averaged into each row
    unsigned workers = 1;
    std::uint64_t seed = 0;
    ScoreMode mode = ScoreMode::noisy_or;
    double linear_weight = 0.5;
    std::optional<RiskMapping> mapping_all;
    bool use_scripts = true; // prefer per-query scripts over configured backends

    void validate() const {
        run.validate();
        if (!(spacing > 0.0 && spacing <= 1.0)) throw input_error("grid spacing must be in (0, 1]");
        double k = 1.0 / spacing;
        if (std::fabs(k - std::round(k)) > 1e-6) {
            throw input_error("grid spacing must divide the unit interval evenly");
        }
        if (runs < 1) throw input_error("runs must be positive");
    }
};

struct GridRow {
    double tau = 0.0;
    double accuracy = 0.0;
    double flops = 0.0;
    double lrm_step_fraction = 0.0;

    bool operator==(const GridRow&) const = default;
};

struct RefPoint {
    double accuracy = 0.0;
    double flops = 0.0;

    bool operator==(const RefPoint&) const = default;
};

struct SweepResult {
    double spacing = 0.05;
    std::vector<GridRow> grid; // sorted by tau, 0..1 inclusive
    RefPoint srm_ref;
    RefPoint lrm_ref;
    int runs = 1;
    std::size_t queries = 0;
    std::size_t failed_queries = 0; // query-run failures recorded and excluded

    bool operator==(const SweepResult&) const = default;
};

inline std::vector<double> tau_grid(double spacing) {
    std::size_t n = static_cast<std::size_t>(std::llround(1.0 / spacing));
    std::vector<double> taus;
    taus.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        // i/n instead of i*spacing: lands on the canonical grid values
        taus.push_back(static_cast<double>(i) / static_cast<double>(n));
    }
    return taus;
}

namespace detail {

struct QueryOutcome {
    bool failed = false;
    double correct = 0.0;
    double flops = 0.0;
    std::size_t lrm_steps = 0;
    std::size_t total_steps = 0;
};

struct BackendPair {
    std::unique_ptr<StepBackend> srm;
    std::unique_ptr<StepBackend> lrm;
};

inline std::unique_ptr<StepBackend> make_backend(const DatasetQuery& q, ModelChoice role,
                                                 const BackendConfig& cfg, bool use_scripts,
                                                 std::uint64_t seed_key) {
    if (use_scripts && q.script) {
        return std::make_unique<PositionalScriptBackend>(*q.script, role, cfg);
    }
    if (cfg.kind == BackendKind::http) {
        BackendConfig c = cfg;
        if (c.seed) *c.seed = static_cast<int>(static_cast<std::uint64_t>(*c.seed) ^ (seed_key & 0x7fffffff));
        return std::make_unique<HttpBackend>(std::move(c));
    }
    if (cfg.script_path.empty()) {
        throw input_error("query '" + q.id + "' has no script and the backend config names none");
    }
    return load_mock_script(cfg.script_path, cfg);
}

inline QueryOutcome run_routed_query(const DatasetQuery& q, const SweepConfig& cfg, double tau,
                                     int run_index, std::size_t query_index) {
    QueryOutcome out;
    try {
        std::uint64_t key = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(run_index) << 32 |
                                                             static_cast<std::uint64_t>(query_index)));
        BackendPair pair{make_backend(q, ModelChoice::SRM, cfg.run.srm, cfg.use_scripts, key),
                         make_backend(q, ModelChoice::LRM, cfg.run.lrm, cfg.use_scripts, key + 1)};
        RunConfig rc = cfg.run;
        rc.tau = tau;
        FinalScorer scorer = make_scorer(cfg.mode, rc, cfg.linear_weight, cfg.mapping_all, key);
        Trace t = run_query(q.table, q.question, rc, *pair.srm, *pair.lrm, q.id, scorer);
        out.correct = t.final_answer && answer_match(*t.final_answer, q.answer) ? 1.0 : 0.0;
        out.flops = t.total_flops;
        for (const auto& s : t.steps) {
            out.total_steps++;
            if (s.model == ModelChoice::LRM) out.lrm_steps++;
        }
    } catch (const std::exception&) {
        out.failed = true;
    }
    return out;
}

inline QueryOutcome run_reference_query(const DatasetQuery& q, const SweepConfig& cfg,
                                        ModelChoice tag, int run_index, std::size_t query_index) {
    QueryOutcome out;
    try {
        std::uint64_t key = splitmix64(cfg.seed ^ splitmix64(0xabcdULL + static_cast<std::uint64_t>(run_index) * 131 +
                                                             query_index));
        const BackendConfig& bc = tag == ModelChoice::SRM ? cfg.run.srm : cfg.run.lrm;
        auto backend = make_backend(q, tag, bc, cfg.use_scripts, key);
        Trace t = run_single_model(q.table, q.question, {}, *backend, tag, cfg.run, q.id);
        out.correct = t.final_answer && answer_match(*t.final_answer, q.answer) ? 1.0 : 0.0;
        out.flops = t.total_flops;
        out.total_steps = t.steps.size();
        if (tag == ModelChoice::LRM) out.lrm_steps = t.steps.size();
    } catch (const std::exception&) {
        out.failed = true;
    }
    return out;
}

struct RowAccumulator {
    double acc_sum = 0.0;
    double flops_sum = 0.0;
    std::size_t lrm_steps = 0;
    std::size_t total_steps = 0;
    std::size_t ok = 0;
    std::size_t failed = 0;

    void add(const QueryOutcome& o) {
        if (o.failed) {
            failed++;
            return;
        }
        ok++;
        acc_sum += o.correct;
        flops_sum += o.flops;
        lrm_steps += o.lrm_steps;
        total_steps += o.total_steps;
    }
    double mean_acc() const { return ok ? acc_sum / static_cast<double>(ok) : 0.0; }
    double mean_flops() const { return ok ? flops_sum / static_cast<double>(ok) : 0.0; }
    double lrm_frac() const {
        return total_steps ? static_cast<double>(lrm_steps) / static_cast<double>(total_steps) : 0.0;
    }
};

} // namespace detail

// Grid search over the routing threshold plus SRM-only and LRM-only reference
// passes, averaged over cfg.runs repetitions. Queries inside a row run
// concurrently; aggregation follows dataset order, so output is deterministic.
// Per-query failures are excluded and counted; more than 10% failures in any
// pass aborts the sweep.
inline SweepResult sweep(std::span<const DatasetQuery> dataset, const SweepConfig& cfg) {
    cfg.validate();
    if (dataset.empty()) throw input_error("sweep needs a non-empty dataset");
    std::vector<double> taus = tau_grid(cfg.spacing);

    SweepResult result;
    result.spacing = cfg.spacing;
    result.runs = cfg.runs;
    result.queries = dataset.size();
    result.grid.resize(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) result.grid[i].tau = taus[i];

    auto check_failures = [&](const std::vector<detail::QueryOutcome>& slots, const std::string& what) {
        std::size_t fails = 0;
        for (const auto& o : slots) fails += o.failed;
        if (fails * 10 > dataset.size()) {
            throw harness_error("aborting sweep: " + std::to_string(fails) + "/" +
                                std::to_string(dataset.size()) + " queries failed during " + what);
        }
    };

    std::vector<detail::RowAccumulator> row_acc(taus.size());
    detail::RowAccumulator srm_acc, lrm_acc;

    std::vector<detail::QueryOutcome> slots(dataset.size());
    for (int run = 0; run < cfg.runs; ++run) {
        for (ModelChoice tag : {ModelChoice::SRM, ModelChoice::LRM}) {
            parallel_for_indexed(dataset.size(), cfg.workers, [&](std::size_t qi) {
                slots[qi] = detail::run_reference_query(dataset[qi], cfg, tag, run, qi);
            });
            check_failures(slots, std::string(to_string(tag)) + "-only reference");
            detail::RowAccumulator& acc = tag == ModelChoice::SRM ? srm_acc : lrm_acc;
            for (const auto& o : slots) acc.add(o);
        }
        for (std::size_t ti = 0; ti < taus.size(); ++ti) {
            parallel_for_indexed(dataset.size(), cfg.workers, [&](std::size_t qi) {
                slots[qi] = detail::run_routed_query(dataset[qi], cfg, taus[ti], run, qi);
            });
            check_failures(slots, "tau=" + format_double(taus[ti]));
            for (const auto& o : slots) row_acc[ti].add(o);
        }
    }

    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        result.grid[ti].accuracy = row_acc[ti].mean_acc();
        result.grid[ti].flops = row_acc[ti].mean_flops();
        result.grid[ti].lrm_step_fraction = row_acc[ti].lrm_frac();
        result.failed_queries += row_acc[ti].failed;
    }
    result.srm_ref = {srm_acc.mean_acc(), srm_acc.mean_flops()};
    result.lrm_ref = {lrm_acc.mean_acc(), lrm_acc.mean_flops()};
    result.failed_queries += srm_acc.failed + lrm_acc.failed;
    return result;
}

// ---------------------------------------------------------------------------
// Accuracy-FLOPs frontier and headline metrics
// ---------------------------------------------------------------------------

struct FrontierPoint {
    double flops = 0.0;
    double accuracy = 0.0;
};

// Nondominated sweep points (grid rows plus both references), sorted by
// FLOPs with strictly increasing accuracy.
inline std::vector<FrontierPoint> pareto_frontier(const SweepResult& r) {
    std::vector<FrontierPoint> pts;
    pts.reserve(r.grid.size() + 2);
    for (const auto& row : r.grid) pts.push_back({row.flops, row.accuracy});
    pts.push_back({r.srm_ref.flops, r.srm_ref.accuracy});
    pts.push_back({r.lrm_ref.flops, r.lrm_ref.accuracy});
    std::sort(pts.begin(), pts.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
        if (a.flops != b.flops) return a.flops < b.flops;
        return a.accuracy > b.accuracy;
    });
    std::vector<FrontierPoint> frontier;
    for (const auto& p : pts) {
        if (frontier.empty() || p.accuracy > frontier.back().accuracy) {
            if (!frontier.empty() && p.flops == frontier.back().flops) frontier.pop_back();
            frontier.push_back(p);
        }
    }
    return frontier;
}

namespace detail {

inline double frontier_acc_at(std::span<const FrontierPoint> frontier, double budget) {
    if (frontier.empty()) throw input_error("empty frontier");
    if (budget <= frontier.front().flops) return frontier.front().accuracy;
    if (budget >= frontier.back().flops) return frontier.back().accuracy;
    for (std::size_t i = 0; i + 1 < frontier.size(); ++i) {
        const auto& lo = frontier[i];
        const auto& hi = frontier[i + 1];
        if (budget <= hi.flops) {
            double t = (budget - lo.flops) / (hi.flops - lo.flops);
            return lo.accuracy + t * (hi.accuracy - lo.accuracy);
        }
    }
    return frontier.back().accuracy;
}

inline std::optional<double> frontier_flops_at(std::span<const FrontierPoint> frontier, double target) {
    if (frontier.empty()) throw input_error("empty frontier");
    if (target > frontier.back().accuracy) return std::nullopt;
    if (target <= frontier.front().accuracy) return frontier.front().flops;
    for (std::size_t i = 0; i + 1 < frontier.size(); ++i) {
        const auto& lo = frontier[i];
        const auto& hi = frontier[i + 1];
        if (target <= hi.accuracy) {
            double t = (target - lo.accuracy) / (hi.accuracy - lo.accuracy);
            return lo.flops + t * (hi.flops - lo.flops);
        }
    }
    return frontier.back().flops;
}

} // namespace detail

// Frontier accuracy interpolated at budget_fraction x LRM-only FLOPs.
inline double acc_at_flops(const SweepResult& r, double budget_fraction = 0.6) {
    auto frontier = pareto_frontier(r);
    return detail::frontier_acc_at(frontier, budget_fraction * r.lrm_ref.flops);
}

// FLOPs interpolated at target_fraction x LRM-only accuracy; nothing when the
// frontier never reaches the target.
inline std::optional<double> flops_at_acc(const SweepResult& r, double target_fraction = 0.98) {
    auto frontier = pareto_frontier(r);
    return detail::frontier_flops_at(frontier, target_fraction * r.lrm_ref.accuracy);
}

// Accuracy (percentage points) per FLOPs unit. Callers pick the unit; the
// shipped reports use 1e12 FLOPs per query.
inline double a_per_f(double accuracy_percent, double flops) {
    if (!(flops > 0.0)) throw input_error("a_per_f requires flops > 0");
    return accuracy_percent / flops;
}

struct MetricReport {
    double budget_fraction = 0.6;
    double target_fraction = 0.98;
    double flops_unit = 1e12;
    double acc_at_budget = 0.0;            // fraction in [0, 1]
    std::optional<double> flops_at_target; // raw FLOPs
    double a_per_f_at_budget = 0.0;        // percent per flops_unit, at the budget point

    bool operator==(const MetricReport&) const = default;
};

inline MetricReport make_report(const SweepResult& r, double budget_fraction = 0.6,
                                double target_fraction = 0.98, double flops_unit = 1e12) {
    MetricReport m;
    m.budget_fraction = budget_fraction;
    m.target_fraction = target_fraction;
    m.flops_unit = flops_unit;
    m.acc_at_budget = acc_at_flops(r, budget_fraction);
    m.flops_at_target = flops_at_acc(r, target_fraction);
    double budget = budget_fraction * r.lrm_ref.flops;
    if (budget > 0.0) {
        m.a_per_f_at_budget = a_per_f(m.acc_at_budget * 100.0, budget / flops_unit);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Result / report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json sweep_result_to_json(const SweepResult& r) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& row : r.grid) {
        grid.push_back({{"tau", row.tau},
                        {"acc", row.accuracy},
                        {"flops", row.flops},
                        {"lrm_frac", row.lrm_step_fraction}});
    }
    return nlohmann::json{{"schema", "sweep/1"},
                          {"spacing", r.spacing},
                          {"grid", grid},
                          {"srm_ref", {{"acc", r.srm_ref.accuracy}, {"flops", r.srm_ref.flops}}},
                          {"lrm_ref", {{"acc", r.lrm_ref.accuracy}, {"flops", r.lrm_ref.flops}}},
                          {"runs", r.runs},
                          {"queries", r.queries},
                          {"failed_queries", r.failed_queries}};
}

inline SweepResult sweep_result_from_json(const nlohmann::json& j) {
    SweepResult r;
    try {
        r.spacing = j.at("spacing").get<double>();
        for (const auto& row : j.at("grid")) {
            r.grid.push_back({row.at("tau").get<double>(), row.at("acc").get<double>(),
                              row.at("flops").get<double>(), row.at("lrm_frac").get<double>()});
        }
        r.srm_ref = {j.at("srm_ref").at("acc").get<double>(), j.at("srm_ref").at("flops").get<double>()};
        r.lrm_ref = {j.at("lrm_ref").at("acc").get<double>(), j.at("lrm_ref").at("flops").get<double>()};
        r.runs = j.value("runs", 1);
        r.queries = j.value("queries", std::size_t{0});
        r.failed_queries = j.value("failed_queries", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed sweep result: ") + e.what());
    }
    return r;
}

inline constexpr std::string_view kCurveCsvHeader = "tau,acc,flops,lrm_frac\n";

// CSV curve for external plotting: tau, acc, flops, lrm_frac.
inline std::string sweep_curve_csv(const SweepResult& r) {
    std::string out{kCurveCsvHeader};
    for (const auto& row : r.grid) {
        out += format_double(row.tau) + ',' + format_double(row.accuracy) + ',' +
               format_double(row.flops) + ',' + format_double(row.lrm_step_fraction) + '\n';
    }
    return out;
}

inline nlohmann::json report_to_json(const MetricReport& m) {
    return nlohmann::json{
        {"schema", "report/1"},
        {"budget_fraction", m.budget_fraction},
        {"target_fraction", m.target_fraction},
        {"flops_unit", m.flops_unit},
        {"acc_at_budget", m.acc_at_budget},
        {"flops_at_target", m.flops_at_target ? nlohmann::json(*m.flops_at_target) : nlohmann::json(nullptr)},
        {"a_per_f_at_budget", m.a_per_f_at_budget},
        {"units", "accuracy in [0,1]; a_per_f in percentage points per flops_unit FLOPs"}};
}

// ---------------------------------------------------------------------------
// Routing-overhead microbenchmark: the per-step routing computation (mask,
// entropy aggregation, risk mapping, fusion, decision) with no backend calls.
// ---------------------------------------------------------------------------

struct RoutingBenchResult {
    std::size_t steps = 0;
    double total_us = 0.0;
    double mean_us = 0.0;
};

inline RoutingBenchResult bench_routing(const Table& table, std::span<const GeneratedStep> steps,
                                        const RunConfig& cfg) {
    TableTrie trie = build_trie(table, cfg.trie);
    volatile std::size_t sink = 0; // keep the loop body alive
    auto start = std::chrono::steady_clock::now();
    for (const auto& step : steps) {
        auto scores = detail::score_step(trie, step, cfg, 1, {});
        sink = sink + (decide(scores.d_final, cfg.tau) == ModelChoice::LRM);
    }
    auto stop = std::chrono::steady_clock::now();
    (void)sink;
    RoutingBenchResult r;
    r.steps = steps.size();
    r.total_us = std::chrono::duration<double, std::micro>(stop - start).count();
    r.mean_us = r.steps ? r.total_us / static_cast<double>(r.steps) : 0.0;
    return r;
}

} // namespace tabroute
