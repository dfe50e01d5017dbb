#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabroute/calibration.hpp"
#include "tabroute/evalharness.hpp"
#include "tabroute/http_backend.hpp"
#include "tabroute/pipeline.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kDefaultTimestamp = "1970-01-01T00:00:00Z";

tabroute::Table load_table_file(const std::string& path) {
    std::string content = tabroute::read_file(path);
    if (path.ends_with(".csv")) {
        return tabroute::table_from_csv(content, fs::path(path).stem().string());
    }
    try {
        return tabroute::table_from_json(json::parse(content));
    } catch (const json::exception& e) {
        throw tabroute::parse_error("table file '" + path + "': " + e.what());
    }
}

tabroute::RiskMapping load_mapping_value(const json& v, const fs::path& base_dir) {
    if (v.is_string()) {
        fs::path p = v.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return tabroute::mapping_from_json(json::parse(tabroute::read_file(p)));
    }
    return tabroute::mapping_from_json(v);
}

tabroute::RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
    tabroute::RunConfig cfg;
    try {
        cfg.tau = j.value("tau", 0.5);
        cfg.step_limit = j.value("step_limit", 128);
        cfg.token_budget = static_cast<std::int64_t>(j.value("token_budget", 16384.0));
        if (j.contains("mappings")) {
            const json& m = j.at("mappings");
            if (m.contains("tab")) cfg.mapping_tab = load_mapping_value(m.at("tab"), base_dir);
            if (m.contains("text")) cfg.mapping_text = load_mapping_value(m.at("text"), base_dir);
        }
        cfg.mapping_tab.signal = tabroute::Signal::tab;
        cfg.mapping_text.signal = tabroute::Signal::text;
        if (j.contains("srm")) cfg.srm = tabroute::backend_config_from_json(j.at("srm"));
        if (j.contains("lrm")) cfg.lrm = tabroute::backend_config_from_json(j.at("lrm"));
        if (j.contains("answer_markers")) {
            cfg.answer_markers = j.at("answer_markers").get<std::vector<std::string>>();
        }
        if (j.contains("trie")) {
            cfg.trie.include_headers = j.at("trie").value("include_headers", true);
            cfg.trie.include_cells = j.at("trie").value("include_cells", true);
        }
    } catch (const json::exception& e) {
        throw tabroute::parse_error(std::string("malformed run config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::unique_ptr<tabroute::StepBackend> make_configured_backend(const tabroute::BackendConfig& cfg,
                                                               const fs::path& base_dir,
                                                               std::optional<int> seed_override) {
    tabroute::BackendConfig c = cfg;
    if (seed_override) c.seed = seed_override;
    if (c.kind == tabroute::BackendKind::http) {
        return std::make_unique<tabroute::HttpBackend>(std::move(c));
    }
    if (c.script_path.empty()) {
        throw tabroute::input_error("mock backend config must name a script file");
    }
    fs::path script = c.script_path;
    if (script.is_relative()) script = base_dir / script;
    return tabroute::load_mock_script(script.string(), std::move(c));
}

json load_config_or_empty(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(tabroute::read_file(path));
    } catch (const json::exception& e) {
        throw tabroute::parse_error("config '" + path + "': " + e.what());
    }
}

// whitespace tokenization for the debug classifier: each token owns its word
// plus the whitespace run that follows, so the ranges tile the text
std::vector<tabroute::TokenSpan> whitespace_tokens(const std::string& text) {
    std::vector<tabroute::TokenSpan> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        tokens.push_back({text.substr(start, i - start), {start, i}});
    }
    if (!tokens.empty() && tokens.front().range.begin != 0) {
        tokens.front().range.begin = 0; // fold leading whitespace into the first token
        tokens.front().text = text.substr(0, tokens.front().range.end);
    }
    return tokens;
}

// --------------------------------------------------------------------------
// classify
// --------------------------------------------------------------------------

int cmd_classify(const std::string& table_path, std::string step_text, const std::string& step_file) {
    tabroute::Table table = load_table_file(table_path);
    if (!step_file.empty()) step_text = tabroute::read_file(step_file);
    tabroute::TableTrie trie = tabroute::build_trie(table);

    std::vector<tabroute::TokenSpan> tokens = whitespace_tokens(step_text);
    std::vector<tabroute::CharRange> ranges;
    for (const auto& t : tokens) ranges.push_back(t.range);
    tabroute::StepMatchResult res = tabroute::match_step_detailed(trie, step_text, ranges);

    std::string flat = step_text;
    for (char& c : flat) {
        if (c == '\n' || c == '\t' || c == '\r') c = ' ';
    }
    std::string marks(flat.size(), ' ');
    for (const auto& span : res.spans) {
        for (std::size_t i = span.orig.begin; i < span.orig.end && i < marks.size(); ++i) marks[i] = '^';
    }
    if (!flat.empty()) {
        std::cout << flat << "\n" << marks << "\n";
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const char* label = res.mask.bits[i] ? "TAB " : "TEXT";
        std::string entry;
        for (const auto& span : res.spans) {
            if (tokens[i].range.overlaps(span.orig)) {
                entry = span.entry + " (" + tabroute::to_string(span.kind) + ")";
                break;
            }
        }
        std::string word = tokens[i].text;
        while (!word.empty() && std::isspace(static_cast<unsigned char>(word.back()))) word.pop_back();
        std::cout << i << "\t" << label << "\t" << word;
        if (!entry.empty()) std::cout << "\t<- " << entry;
        std::cout << "\n";
    }
    return 0;
}

// --------------------------------------------------------------------------
// calibrate
// --------------------------------------------------------------------------

int cmd_calibrate(const std::string& traces_path, const std::string& dataset_path,
                  const json& config, const fs::path& config_dir, const fs::path& out_dir,
                  std::optional<int> seed, const std::string& timestamp) {
    std::vector<tabroute::Trace> traces = tabroute::traces_from_jsonl(tabroute::read_file(traces_path));
    if (traces.empty()) {
        throw tabroute::calibration_error("traces file '" + traces_path + "' holds no traces");
    }
    std::vector<tabroute::DatasetQuery> dataset =
        tabroute::dataset_from_jsonl(tabroute::read_file(dataset_path));
    std::map<std::string, const tabroute::DatasetQuery*> by_id;
    for (const auto& q : dataset) by_id[q.id] = &q;

    tabroute::RunConfig run_cfg = run_config_from_json(config.value("run", json::object()), config_dir);
    tabroute::LabelingConfig label_cfg;
    if (config.contains("labeling")) {
        const json& lc = config.at("labeling");
        label_cfg.max_suffix_cap = lc.value("max_suffix_cap", 8);
        label_cfg.repeats = lc.value("repeats", 5);
        label_cfg.flip_ratio = lc.value("flip_ratio", 0.8);
    }

    std::vector<tabroute::CalibrationTrace> cal_traces;
    for (auto& t : traces) {
        auto it = by_id.find(t.query_id);
        if (it == by_id.end()) {
            throw tabroute::input_error("trace '" + t.query_id + "' has no dataset entry");
        }
        cal_traces.push_back({std::move(t), it->second->answer});
    }

    // one shared mock backend consumes its script linearly across all
    // regenerations; http backends are rebuilt per call with a derived seed
    std::unique_ptr<tabroute::StepBackend> shared_mock;
    if (run_cfg.srm.kind == tabroute::BackendKind::mock) {
        shared_mock = make_configured_backend(run_cfg.srm, config_dir, std::nullopt);
    }
    auto runner = [&](const tabroute::Trace& trace, std::size_t prefix_len,
                      int repeat) -> std::optional<std::string> {
        const tabroute::DatasetQuery& q = *by_id.at(trace.query_id);
        std::vector<std::string> prefix;
        for (std::size_t i = 0; i < prefix_len; ++i) prefix.push_back(trace.steps[i].step.text);
        tabroute::Trace out;
        if (shared_mock) {
            out = tabroute::run_single_model(q.table, trace.question, prefix, *shared_mock,
                                             tabroute::ModelChoice::SRM, run_cfg, trace.query_id);
        } else {
            int call_seed = (seed ? *seed : 0) * 1000 + repeat;
            auto backend = make_configured_backend(run_cfg.srm, config_dir, call_seed);
            out = tabroute::run_single_model(q.table, trace.question, prefix, *backend,
                                             tabroute::ModelChoice::SRM, run_cfg, trace.query_id);
        }
        return out.final_answer;
    };

    tabroute::LabelingResult labels =
        tabroute::build_labels(cal_traces, runner, tabroute::answer_match, label_cfg);
    for (const auto& w : labels.warnings) std::cerr << "warning: " << w << "\n";
    if (labels.samples.empty()) {
        throw tabroute::calibration_error("no calibration samples produced (all traces excluded)");
    }

    tabroute::RiskMapping tab = tabroute::fit_sigmoid(labels.samples, tabroute::Signal::tab);
    tabroute::RiskMapping text = tabroute::fit_sigmoid(labels.samples, tabroute::Signal::text);

    tabroute::atomic_write_file(out_dir / "mapping_tab.json",
                                tabroute::mapping_to_json(tab, timestamp).dump(2) + "\n");
    tabroute::atomic_write_file(out_dir / "mapping_text.json",
                                tabroute::mapping_to_json(text, timestamp).dump(2) + "\n");
    tabroute::atomic_write_file(out_dir / "calibration_samples.jsonl",
                                tabroute::samples_to_jsonl(labels.samples));

    std::cout << "retained " << labels.traces_retained << " trace(s), excluded "
              << labels.traces_excluded << ", skipped " << labels.traces_skipped << "; "
              << labels.samples.size() << " samples\n";
    std::cout << "tab:  a=" << tabroute::format_double(tab.a) << " b=" << tabroute::format_double(tab.b)
              << " loss=" << tabroute::format_double(tab.fit_loss) << "\n";
    std::cout << "text: a=" << tabroute::format_double(text.a) << " b=" << tabroute::format_double(text.b)
              << " loss=" << tabroute::format_double(text.fit_loss) << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// run
// --------------------------------------------------------------------------

int cmd_run(const json& config, const fs::path& config_dir, const std::string& table_path,
            const std::string& question, const std::string& dataset_path, const std::string& query_id,
            std::optional<double> tau_override, const fs::path& out_dir, std::optional<int> seed) {
    tabroute::RunConfig cfg = run_config_from_json(config, config_dir);
    if (tau_override) cfg.tau = *tau_override;

    tabroute::Table table;
    std::string q = question;
    std::string id = query_id.empty() ? "query" : query_id;
    std::unique_ptr<tabroute::StepBackend> srm, lrm;

    if (!dataset_path.empty()) {
        auto dataset = tabroute::dataset_from_jsonl(tabroute::read_file(dataset_path));
        const tabroute::DatasetQuery* found = nullptr;
        for (const auto& dq : dataset) {
            if (dq.id == query_id || query_id.empty()) {
                found = &dq;
                break;
            }
        }
        if (!found) throw tabroute::input_error("query '" + query_id + "' not found in dataset");
        table = found->table;
        q = found->question;
        id = found->id;
        if (found->script) {
            srm = std::make_unique<tabroute::PositionalScriptBackend>(*found->script,
                                                                      tabroute::ModelChoice::SRM, cfg.srm);
            lrm = std::make_unique<tabroute::PositionalScriptBackend>(*found->script,
                                                                      tabroute::ModelChoice::LRM, cfg.lrm);
        }
    } else {
        if (table_path.empty() || question.empty()) {
            throw tabroute::input_error("run needs --table and --question (or --dataset/--id)");
        }
        table = load_table_file(table_path);
    }
    if (!srm) srm = make_configured_backend(cfg.srm, config_dir, seed);
    if (!lrm) lrm = make_configured_backend(cfg.lrm, config_dir, seed);

    tabroute::Trace trace = tabroute::run_query(table, q, cfg, *srm, *lrm, id);
    tabroute::atomic_write_file(out_dir / (id + ".trace.jsonl"),
                                tabroute::trace_to_json(trace).dump() + "\n");

    std::cout << "terminated_by: " << tabroute::to_string(trace.terminated_by) << "\n";
    std::cout << "steps: " << trace.steps.size() << "\n";
    std::cout << "total_flops: " << tabroute::format_double(trace.total_flops) << "\n";
    std::cout << "answer: " << (trace.final_answer ? *trace.final_answer : "(absent)") << "\n";
    return trace.terminated_by == tabroute::TerminationReason::answer ? 0 : 3;
}

// --------------------------------------------------------------------------
// sweep
// --------------------------------------------------------------------------

tabroute::SweepConfig sweep_config_from_json(const json& j, const fs::path& base_dir) {
    tabroute::SweepConfig cfg;
    cfg.run = run_config_from_json(j.value("run", json::object()), base_dir);
    cfg.spacing = j.value("spacing", 0.05);
    cfg.runs = j.value("runs", 3);
    cfg.workers = j.value("workers", 0u);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.mode = tabroute::score_mode_from_string(j.value("mode", "noisy_or"));
    cfg.linear_weight = j.value("linear_weight", 0.5);
    if (j.contains("mapping_all")) cfg.mapping_all = load_mapping_value(j.at("mapping_all"), base_dir);
    cfg.use_scripts = j.value("use_scripts", true);
    return cfg;
}

int cmd_sweep(const json& config, const fs::path& config_dir, const std::string& dataset_path,
              const fs::path& out_dir, tabroute::SweepConfig cfg) {
    (void)config;
    (void)config_dir;
    auto dataset = tabroute::dataset_from_jsonl(tabroute::read_file(dataset_path));
    if (cfg.workers == 0) cfg.workers = std::max(1u, std::thread::hardware_concurrency());

    tabroute::SweepResult result = tabroute::sweep(dataset, cfg);
    tabroute::atomic_write_file(out_dir / "sweep_result.json",
                                tabroute::sweep_result_to_json(result).dump(2) + "\n");
    tabroute::atomic_write_file(out_dir / "curve.csv", tabroute::sweep_curve_csv(result));

    std::cout << "grid rows: " << result.grid.size() << "\n";
    std::cout << "srm_ref: acc=" << tabroute::format_double(result.srm_ref.accuracy)
              << " flops=" << tabroute::format_double(result.srm_ref.flops) << "\n";
    std::cout << "lrm_ref: acc=" << tabroute::format_double(result.lrm_ref.accuracy)
              << " flops=" << tabroute::format_double(result.lrm_ref.flops) << "\n";
    std::cout << "failed queries: " << result.failed_queries << "\n";
    return 0;
}

// --------------------------------------------------------------------------
// report
// --------------------------------------------------------------------------

int cmd_report(const std::string& input_path, double budget_fraction, double target_fraction,
               double flops_unit, const fs::path& out_dir, bool write_outputs) {
    tabroute::SweepResult result =
        tabroute::sweep_result_from_json(json::parse(tabroute::read_file(input_path)));
    tabroute::MetricReport report =
        tabroute::make_report(result, budget_fraction, target_fraction, flops_unit);
    json rj = tabroute::report_to_json(report);
    std::cout << rj.dump(2) << "\n";
    std::cout << tabroute::sweep_curve_csv(result);
    if (write_outputs) {
        tabroute::atomic_write_file(out_dir / "report.json", rj.dump(2) + "\n");
        tabroute::atomic_write_file(out_dir / "curve.csv", tabroute::sweep_curve_csv(result));
    }
    return 0;
}

// --------------------------------------------------------------------------
// bench-routing
// --------------------------------------------------------------------------

tabroute::GeneratedStep synthetic_step(std::mt19937_64& rng, const tabroute::Table& table,
                                       std::size_t n_tokens, int top_k) {
    std::vector<std::string> vocab;
    for (const auto& h : table.headers) vocab.push_back(h);
    for (const auto& row : table.rows) {
        for (const auto& c : row) vocab.push_back(c);
    }
    vocab.insert(vocab.end(), {"the", "of", "sum", "is", "then", "row", "we", "take"});

    tabroute::GeneratedStep step;
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    while (step.tokens.size() < n_tokens) {
        std::string word = vocab[pick(rng)] + " ";
        // split each word into 1-2 tokens to mimic subword boundaries
        std::size_t cut = word.size() > 4 ? word.size() / 2 : word.size();
        for (std::string piece : {word.substr(0, cut), word.substr(cut)}) {
            if (piece.empty() || step.tokens.size() >= n_tokens) continue;
            tabroute::TokenSpan span{piece, {step.text.size(), step.text.size() + piece.size()}};
            step.text += piece;
            step.tokens.push_back(span);
            tabroute::TokenDistribution dist;
            dist.full = false;
            double mass = 0.9;
            for (int k = 0; k < top_k; ++k) {
                double p = unif(rng) * mass / top_k;
                dist.entries.emplace_back(k, p);
                dist.coverage += p;
            }
            step.distributions.push_back(std::move(dist));
        }
    }
    step.finish = tabroute::FinishReason::answer;
    step.validate();
    return step;
}

int cmd_bench(const std::string& fixture_path, const std::string& table_path, std::size_t n_steps,
              std::size_t n_tokens, std::size_t n_entries, int top_k, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    tabroute::Table table;
    if (!table_path.empty()) {
        table = load_table_file(table_path);
    } else {
        table.id = "bench";
        table.headers = {"name", "value"};
        std::uniform_int_distribution<int> num(100, 99999);
        for (std::size_t i = 0; i + 2 <= n_entries; i += 2) {
            table.rows.push_back({"entry word" + std::to_string(i), std::to_string(num(rng))});
        }
    }

    std::vector<tabroute::GeneratedStep> steps;
    if (!fixture_path.empty()) {
        steps = tabroute::parse_mock_script(tabroute::read_file(fixture_path));
    } else {
        for (std::size_t i = 0; i < n_steps; ++i) steps.push_back(synthetic_step(rng, table, n_tokens, top_k));
    }

    tabroute::RunConfig cfg;
    cfg.mapping_tab = {1.0, -1.0, tabroute::Signal::tab};
    cfg.mapping_text = {1.0, -1.0, tabroute::Signal::text};
    tabroute::RoutingBenchResult res = tabroute::bench_routing(table, steps, cfg);
    std::cout << "steps: " << res.steps << "\n";
    std::cout << "mean routing overhead: " << tabroute::format_double(res.mean_us) << " us/step\n";
    std::cout << "total: " << tabroute::format_double(res.total_us) << " us\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"table-aware stepwise model routing between a small and a large backend"};
    app.require_subcommand(1);

    std::string config_path, output_dir = ".";
    std::optional<int> seed;
    app.add_option("--config", config_path, "JSON config file (flags override its fields)");
    app.add_option("--output-dir", output_dir, "directory for file outputs");
    app.add_option("--seed", seed, "seed for seeded operations");

    // classify
    auto* classify = app.add_subcommand("classify", "annotate a step's tokens as table or text");
    std::string cl_table, cl_step, cl_step_file;
    classify->add_option("--table", cl_table, "table file (.json or .csv)")->required();
    classify->add_option("--step", cl_step, "step text");
    classify->add_option("--step-file", cl_step_file, "file containing the step text");

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate", "fit risk mappings from validation traces");
    std::string ca_traces, ca_dataset, ca_timestamp = kDefaultTimestamp;
    calibrate->add_option("--traces", ca_traces, "trace JSONL from routed or single-model runs")->required();
    calibrate->add_option("--dataset", ca_dataset, "dataset JSONL with gold answers")->required();
    calibrate->add_option("--timestamp", ca_timestamp, "created_at stamp for mapping files");

    // run
    auto* run = app.add_subcommand("run", "routed inference over one query");
    std::string r_table, r_question, r_dataset, r_id;
    std::optional<double> r_tau;
    run->add_option("--table", r_table, "table file");
    run->add_option("--question", r_question, "question text");
    run->add_option("--dataset", r_dataset, "dataset JSONL (alternative to --table/--question)");
    run->add_option("--id", r_id, "query id inside --dataset");
    run->add_option("--tau", r_tau, "routing threshold override");

    // sweep
    auto* sw = app.add_subcommand("sweep", "threshold grid search with reference passes");
    std::string s_dataset;
    std::optional<double> s_spacing, s_linw;
    std::optional<int> s_runs;
    std::optional<unsigned> s_workers;
    std::optional<std::string> s_mode;
    sw->add_option("--dataset", s_dataset, "dataset JSONL")->required();
    sw->add_option("--spacing", s_spacing, "tau grid spacing (default 0.05)");
    sw->add_option("--runs", s_runs, "independent repetitions to average");
    sw->add_option("--workers", s_workers, "worker threads (0 = available parallelism)");
    sw->add_option("--score-mode", s_mode, "noisy_or|average_token|table_only|text_only|linear_weight|random");
    sw->add_option("--linear-weight", s_linw, "weight for linear_weight mode");

    // report
    auto* rep = app.add_subcommand("report", "metrics and CSV curve from a sweep result");
    std::string rp_input;
    double rp_budget = 0.6, rp_target = 0.98, rp_unit = 1e12;
    bool rp_write = false;
    rep->add_option("--input", rp_input, "sweep_result.json")->required();
    rep->add_option("--budget-fraction", rp_budget, "budget as a fraction of LRM-only FLOPs");
    rep->add_option("--target-fraction", rp_target, "target as a fraction of LRM-only accuracy");
    rep->add_option("--flops-unit", rp_unit, "FLOPs unit for A/F (default 1e12)");
    rep->add_flag("--write", rp_write, "also write report.json and curve.csv to --output-dir");

    // bench-routing
    auto* bench = app.add_subcommand("bench-routing", "per-step routing overhead, no backend calls");
    std::string b_fixture, b_table;
    std::size_t b_steps = 100, b_tokens = 200, b_entries = 50;
    int b_topk = 20;
    bench->add_option("--fixture", b_fixture, "mock script JSONL to time against");
    bench->add_option("--table", b_table, "table file (synthesized when absent)");
    bench->add_option("--steps", b_steps, "synthetic step count");
    bench->add_option("--tokens", b_tokens, "tokens per synthetic step");
    bench->add_option("--entries", b_entries, "table entries when synthesizing");
    bench->add_option("--top-k", b_topk, "entries per token distribution");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        json config = load_config_or_empty(config_path);
        fs::path config_dir = config_path.empty() ? fs::path(".") : fs::path(config_path).parent_path();
        fs::path out_dir = output_dir;

        if (classify->parsed()) {
            return cmd_classify(cl_table, cl_step, cl_step_file);
        }
        if (calibrate->parsed()) {
            return cmd_calibrate(ca_traces, ca_dataset, config, config_dir, out_dir, seed, ca_timestamp);
        }
        if (run->parsed()) {
            return cmd_run(config.contains("run") ? config.at("run") : config, config_dir, r_table,
                           r_question, r_dataset, r_id, r_tau, out_dir, seed);
        }
        if (sw->parsed()) {
            tabroute::SweepConfig cfg = sweep_config_from_json(config, config_dir);
            if (s_spacing) cfg.spacing = *s_spacing;
            if (s_runs) cfg.runs = *s_runs;
            if (s_workers) cfg.workers = *s_workers;
            if (s_mode) cfg.mode = tabroute::score_mode_from_string(*s_mode);
            if (s_linw) cfg.linear_weight = *s_linw;
            if (seed) cfg.seed = static_cast<std::uint64_t>(*seed);
            return cmd_sweep(config, config_dir, s_dataset, out_dir, std::move(cfg));
        }
        if (rep->parsed()) {
            return cmd_report(rp_input, rp_budget, rp_target, rp_unit, out_dir, rp_write);
        }
        if (bench->parsed()) {
            return cmd_bench(b_fixture, b_table, b_steps, b_tokens, b_entries, b_topk,
                             seed ? static_cast<std::uint64_t>(*seed) : 0);
        }
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const tabroute::input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const tabroute::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
