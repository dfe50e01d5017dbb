#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabroute/backend.hpp"
#include "tabroute/entropy.hpp"
#include "tabroute/errors.hpp"
#include "tabroute/risk.hpp"
#include "tabroute/router.hpp"
#include "tabroute/table.hpp"
#include "tabroute/trie.hpp"

namespace tabroute {

// Inference cost of one generation: 2N FLOPs per generated token for an
// N-parameter model.
inline double meter_flops(std::int64_t param_count, std::size_t token_count) {
    if (param_count <= 0) throw input_error("param_count must be positive");
    return 2.0 * static_cast<double>(param_count) * static_cast<double>(token_count);
}

enum class TerminationReason { answer, step_limit, token_limit };

inline const char* to_string(TerminationReason t) {
    switch (t) {
        case TerminationReason::answer: return "answer";
        case TerminationReason::step_limit: return "step_limit";
        case TerminationReason::token_limit: return "token_limit";
    }
    return "?";
}

inline TerminationReason termination_from_string(const std::string& s) {
    if (s == "answer") return TerminationReason::answer;
    if (s == "step_limit") return TerminationReason::step_limit;
    if (s == "token_limit") return TerminationReason::token_limit;
    throw parse_error("unknown termination reason: " + s);
}

// Everything recorded about one kept step. `step` carries the full token and
// distribution payload so traces can be replayed and relabeled offline.
struct StepRecord {
    int index = 1; // 1-based, contiguous
    ModelChoice model = ModelChoice::SRM;
    std::int64_t param_count = 1;
    GeneratedStep step;
    std::vector<double> entropies;
    TokenMask mask;
    std::size_t n_tab = 0, n_text = 0;
    std::optional<double> phi_tab, phi_text;
    std::optional<double> d_tab, d_text, d_final;
    std::optional<ModelChoice> decision; // generator chosen for step index+1; absent on the terminal step
    bool regenerated = false;            // first step only: SRM draft was discarded and redone by the LRM

    std::size_t token_count() const { return step.token_count(); }
};

struct DiscardedStep {
    GeneratedStep step;
    std::int64_t param_count = 1;
};

struct Trace {
    std::string query_id;
    std::string table_id;
    std::string question;
    std::vector<StepRecord> steps;
    std::optional<std::string> final_answer;
    double total_flops = 0.0;
    TerminationReason terminated_by = TerminationReason::answer;
    // The phase-(2) SRM draft that was replaced, kept for replay and so FLOPs
    // accounting with or without it stays recomputable.
    std::optional<DiscardedStep> discarded_first_step;
};

struct RunConfig {
    double tau = 0.5;
    int step_limit = 128;
    std::int64_t token_budget = 16384;
    RiskMapping mapping_tab{0.0, 0.0, Signal::tab};
    RiskMapping mapping_text{0.0, 0.0, Signal::text};
    BackendConfig srm;
    BackendConfig lrm;
    TrieOptions trie;
    std::vector<std::string> answer_markers{"Final Answer"};

    void validate() const {
        if (!(tau >= 0.0 && tau <= 1.0)) throw input_error("tau must be in [0, 1]");
        if (step_limit <= 0) throw input_error("step_limit must be positive");
        if (token_budget <= 0) throw input_error("token_budget must be positive");
    }
};

// Returns the content of the last boxed-answer pattern, else the text after
// the last answer marker, else nothing.
inline std::optional<std::string> extract_answer(std::string_view text,
                                                 std::span<const std::string> markers) {
    static constexpr std::string_view kBoxed = "\\boxed{";
    std::optional<std::string> best;
    std::size_t search = 0;
    while (true) {
        std::size_t at = text.find(kBoxed, search);
        if (at == std::string::npos) break;
        std::size_t i = at + kBoxed.size();
        int depth = 1;
        std::string content;
        for (; i < text.size() && depth > 0; ++i) {
            if (text[i] == '{') ++depth;
            else if (text[i] == '}') --depth;
            if (depth > 0) content += text[i];
        }
        if (depth == 0) best = content;
        search = at + kBoxed.size();
    }
    if (best) return best;

    std::size_t marker_end = std::string::npos;
    for (const auto& marker : markers) {
        if (marker.empty()) continue;
        std::size_t at = text.rfind(marker);
        if (at != std::string::npos) {
            std::size_t end = at + marker.size();
            if (marker_end == std::string::npos || end > marker_end) marker_end = end;
        }
    }
    if (marker_end == std::string::npos) return std::nullopt;
    std::string_view tail = text.substr(marker_end);
    auto strip_front = [&tail](std::string_view prefix) {
        if (tail.starts_with(prefix)) tail.remove_prefix(prefix.size());
    };
    while (!tail.empty() && (tail.front() == ' ' || tail.front() == ':' || tail.front() == '=')) {
        tail.remove_prefix(1);
    }
    strip_front("is");
    while (!tail.empty() && (tail.front() == ' ' || tail.front() == ':' || tail.front() == '=')) {
        tail.remove_prefix(1);
    }
    while (!tail.empty() && (tail.back() == ' ' || tail.back() == '\n' || tail.back() == '.')) {
        tail.remove_suffix(1);
    }
    if (tail.empty()) return std::nullopt;
    return std::string(tail);
}

// Inputs handed to a pluggable final-score function (used by the harness's
// ablation scoring modes). The default path fuses the two mapped risks with
// Noisy-OR.
struct ScoreInputs {
    std::size_t step_index = 1;
    std::span<const double> entropies;
    const TokenMask* mask = nullptr;
    const StepUncertainty* uncertainty = nullptr;
    std::optional<double> d_tab, d_text;
};
using FinalScorer = std::function<double(const ScoreInputs&)>;

namespace detail {

struct StepScores {
    std::vector<double> entropies;
    TokenMask mask;
    StepUncertainty uncertainty;
    std::optional<double> d_tab, d_text;
    double d_final = 0.0;
};

inline StepScores score_step(const TableTrie& trie, const GeneratedStep& step,
                             const RunConfig& cfg, std::size_t step_index,
                             const FinalScorer& scorer) {
    StepScores s;
    std::vector<CharRange> ranges;
    ranges.reserve(step.tokens.size());
    for (const auto& t : step.tokens) ranges.push_back(t.range);
    s.mask = match_step(trie, step.text, ranges);
    s.entropies.reserve(step.distributions.size());
    for (const auto& d : step.distributions) s.entropies.push_back(token_entropy(d));
    s.uncertainty = step_uncertainty(s.entropies, s.mask);
    if (s.uncertainty.phi_tab) s.d_tab = apply_mapping(cfg.mapping_tab, *s.uncertainty.phi_tab);
    if (s.uncertainty.phi_text) s.d_text = apply_mapping(cfg.mapping_text, *s.uncertainty.phi_text);
    if (scorer) {
        ScoreInputs in;
        in.step_index = step_index;
        in.entropies = s.entropies;
        in.mask = &s.mask;
        in.uncertainty = &s.uncertainty;
        in.d_tab = s.d_tab;
        in.d_text = s.d_text;
        s.d_final = scorer(in);
    } else {
        s.d_final = fuse(s.d_tab, s.d_text);
    }
    return s;
}

inline StepRecord make_record(int index, GeneratedStep step, std::int64_t param_count,
                              std::optional<detail::StepScores> scores) {
    StepRecord r;
    r.index = index;
    r.model = step.model;
    r.param_count = param_count;
    if (scores) {
        r.entropies = std::move(scores->entropies);
        r.mask = std::move(scores->mask);
        r.n_tab = scores->uncertainty.n_tab;
        r.n_text = scores->uncertainty.n_text;
        r.phi_tab = scores->uncertainty.phi_tab;
        r.phi_text = scores->uncertainty.phi_text;
        r.d_tab = scores->d_tab;
        r.d_text = scores->d_text;
        r.d_final = scores->d_final;
    }
    r.step = std::move(step);
    return r;
}

} // namespace detail

// Routed generation over one query.
//
// (1) the SRM generates the first step; (2) its routing score is computed and
// the step is regenerated by the LRM when the score strictly exceeds tau,
// with both generations' FLOPs metered; (3) each completed step's score picks
// the generator of the next step; (4) the loop ends at an answer or at the
// step/token limits.
inline Trace run_query(const Table& table, const std::string& question, const RunConfig& cfg,
                       StepBackend& srm, StepBackend& lrm, std::string query_id = {},
                       const FinalScorer& scorer = {}) {
    cfg.validate();
    Trace trace;
    trace.query_id = std::move(query_id);
    trace.table_id = table.id;
    trace.question = question;

    TableTrie trie = build_trie(table, cfg.trie);
    std::vector<std::string> prior;
    std::int64_t total_tokens = 0;

    auto generate = [&](ModelChoice tag) {
        StepBackend& backend = tag == ModelChoice::LRM ? lrm : srm;
        StepContext ctx{&table, question, prior};
        GeneratedStep step = backend.generate_step(ctx);
        step.model = tag;
        step.validate();
        trace.total_flops += meter_flops(backend.config().param_count, step.token_count());
        total_tokens += static_cast<std::int64_t>(step.token_count());
        return step;
    };
    auto score = [&](const GeneratedStep& step, std::size_t index) -> std::optional<detail::StepScores> {
        if (step.token_count() == 0) return std::nullopt;
        return detail::score_step(trie, step, cfg, index, scorer);
    };

    // phases (1) and (2)
    GeneratedStep cur = generate(ModelChoice::SRM);
    std::optional<detail::StepScores> cur_scores = score(cur, 1);
    bool regenerated = false;
    if (cur_scores && cur_scores->d_final > cfg.tau) {
        trace.discarded_first_step = DiscardedStep{std::move(cur), srm.config().param_count};
        cur = generate(ModelChoice::LRM);
        cur_scores = score(cur, 1);
        regenerated = true;
    }
    std::int64_t cur_params = (cur.model == ModelChoice::LRM ? lrm : srm).config().param_count;
    trace.steps.push_back(detail::make_record(1, cur, cur_params, cur_scores));
    trace.steps.back().regenerated = regenerated;

    // phases (3) and (4)
    int index = 1;
    while (true) {
        const StepRecord& last = trace.steps.back();
        if (last.step.finish == FinishReason::answer) {
            trace.terminated_by = TerminationReason::answer;
            trace.final_answer = extract_answer(last.step.text, cfg.answer_markers);
            break;
        }
        if (last.step.finish == FinishReason::length_limit || total_tokens >= cfg.token_budget) {
            trace.terminated_by = TerminationReason::token_limit;
            break;
        }
        if (index >= cfg.step_limit) {
            trace.terminated_by = TerminationReason::step_limit;
            break;
        }

        ModelChoice next_model =
            last.d_final ? decide(*last.d_final, cfg.tau) : ModelChoice::SRM;
        trace.steps[static_cast<std::size_t>(index - 1)].decision = next_model;

        prior.push_back(last.step.text);
        GeneratedStep next = generate(next_model);
        auto next_scores = score(next, static_cast<std::size_t>(index + 1));
        std::int64_t params = (next_model == ModelChoice::LRM ? lrm : srm).config().param_count;
        trace.steps.push_back(detail::make_record(index + 1, std::move(next), params, std::move(next_scores)));
        ++index;
    }
    return trace;
}

// Fixed-generator pass: no scoring, no first-step refinement. Used for the
// SRM-only / LRM-only reference points and for suffix regeneration during
// calibration. `prefix_steps` are treated as already-generated context; their
// cost is not metered here.
inline Trace run_single_model(const Table& table, const std::string& question,
                              std::span<const std::string> prefix_steps, StepBackend& backend,
                              ModelChoice tag, const RunConfig& cfg, std::string query_id = {}) {
    cfg.validate();
    Trace trace;
    trace.query_id = std::move(query_id);
    trace.table_id = table.id;
    trace.question = question;

    std::vector<std::string> prior(prefix_steps.begin(), prefix_steps.end());
    int index = static_cast<int>(prefix_steps.size());
    std::int64_t total_tokens = 0;
    while (true) {
        if (!trace.steps.empty()) {
            const StepRecord& last = trace.steps.back();
            if (last.step.finish == FinishReason::answer) {
                trace.terminated_by = TerminationReason::answer;
                trace.final_answer = extract_answer(last.step.text, cfg.answer_markers);
                break;
            }
            if (last.step.finish == FinishReason::length_limit || total_tokens >= cfg.token_budget) {
                trace.terminated_by = TerminationReason::token_limit;
                break;
            }
        }
        if (index >= cfg.step_limit) {
            trace.terminated_by = TerminationReason::step_limit;
            break;
        }
        if (!trace.steps.empty()) {
            trace.steps.back().decision = tag;
            prior.push_back(trace.steps.back().step.text);
        }
        StepContext ctx{&table, question, prior};
        GeneratedStep step = backend.generate_step(ctx);
        step.model = tag;
        step.validate();
        trace.total_flops += meter_flops(backend.config().param_count, step.token_count());
        total_tokens += static_cast<std::int64_t>(step.token_count());
        ++index;
        trace.steps.push_back(detail::make_record(index, std::move(step), backend.config().param_count, std::nullopt));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Trace persistence (JSONL, one trace per line, schema "trace/1")
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json optional_to_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> optional_from_json(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

} // namespace detail

inline nlohmann::json step_record_to_json(const StepRecord& r) {
    nlohmann::json j = step_to_json(r.step);
    j["index"] = r.index;
    j["model"] = to_string(r.model);
    j["param_count"] = r.param_count;
    j["token_count"] = r.token_count();
    j["n_tab"] = r.n_tab;
    j["n_text"] = r.n_text;
    j["phi_tab"] = detail::optional_to_json(r.phi_tab);
    j["phi_text"] = detail::optional_to_json(r.phi_text);
    j["d_tab"] = detail::optional_to_json(r.d_tab);
    j["d_text"] = detail::optional_to_json(r.d_text);
    j["d_final"] = detail::optional_to_json(r.d_final);
    j["decision"] = r.decision ? nlohmann::json(to_string(*r.decision)) : nlohmann::json(nullptr);
    j["regenerated"] = r.regenerated;
    j["entropies"] = r.entropies;
    nlohmann::json mask = nlohmann::json::array();
    for (bool b : r.mask.bits) mask.push_back(b ? 1 : 0);
    j["mask"] = mask;
    return j;
}

inline StepRecord step_record_from_json(const nlohmann::json& j) {
    StepRecord r;
    try {
        r.step = step_from_json(j);
        r.index = j.at("index").get<int>();
        r.model = model_choice_from_string(j.at("model").get<std::string>());
        r.step.model = r.model;
        r.param_count = j.at("param_count").get<std::int64_t>();
        r.n_tab = j.value("n_tab", std::size_t{0});
        r.n_text = j.value("n_text", std::size_t{0});
        r.phi_tab = detail::optional_from_json(j, "phi_tab");
        r.phi_text = detail::optional_from_json(j, "phi_text");
        r.d_tab = detail::optional_from_json(j, "d_tab");
        r.d_text = detail::optional_from_json(j, "d_text");
        r.d_final = detail::optional_from_json(j, "d_final");
        if (j.contains("decision") && !j.at("decision").is_null()) {
            r.decision = model_choice_from_string(j.at("decision").get<std::string>());
        }
        r.regenerated = j.value("regenerated", false);
        r.entropies = j.value("entropies", std::vector<double>{});
        if (j.contains("mask")) {
            for (const auto& b : j.at("mask")) r.mask.bits.push_back(b.get<int>() != 0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed step record: ") + e.what());
    }
    return r;
}

inline nlohmann::json trace_to_json(const Trace& t) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : t.steps) steps.push_back(step_record_to_json(s));
    nlohmann::json discarded(nullptr);
    if (t.discarded_first_step) {
        discarded = step_to_json(t.discarded_first_step->step);
        discarded["param_count"] = t.discarded_first_step->param_count;
    }
    return nlohmann::json{{"schema", "trace/1"},
                          {"query_id", t.query_id},
                          {"table_id", t.table_id},
                          {"question", t.question},
                          {"steps", steps},
                          {"final_answer", t.final_answer ? nlohmann::json(*t.final_answer) : nlohmann::json(nullptr)},
                          {"total_flops", t.total_flops},
                          {"terminated_by", to_string(t.terminated_by)},
                          {"discarded_first_step", discarded}};
}

inline Trace trace_from_json(const nlohmann::json& j) {
    Trace t;
    try {
        t.query_id = j.at("query_id").get<std::string>();
        t.table_id = j.value("table_id", std::string{});
        t.question = j.value("question", std::string{});
        for (const auto& s : j.at("steps")) t.steps.push_back(step_record_from_json(s));
        if (j.contains("final_answer") && !j.at("final_answer").is_null()) {
            t.final_answer = j.at("final_answer").get<std::string>();
        }
        t.total_flops = j.at("total_flops").get<double>();
        t.terminated_by = termination_from_string(j.at("terminated_by").get<std::string>());
        if (j.contains("discarded_first_step") && !j.at("discarded_first_step").is_null()) {
            DiscardedStep d;
            d.step = step_from_json(j.at("discarded_first_step"));
            d.step.model = ModelChoice::SRM;
            d.param_count = j.at("discarded_first_step").at("param_count").get<std::int64_t>();
            t.discarded_first_step = std::move(d);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed trace: ") + e.what());
    }
    return t;
}

inline std::vector<Trace> traces_from_jsonl(const std::string& content) {
    std::vector<Trace> traces;
    for_each_jsonl_line(content, [&](std::size_t line_no, const std::string& line) {
        try {
            traces.push_back(trace_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw parse_error("traces line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return traces;
}

inline std::string traces_to_jsonl(std::span<const Trace> traces) {
    std::string out;
    for (const auto& t : traces) {
        out += trace_to_json(t).dump();
        out += '\n';
    }
    return out;
}

// Mock scripts that reproduce this trace when replayed through run_query with
// the same config: each backend's generations in chronological order.
struct ReplayScripts {
    std::vector<GeneratedStep> srm;
    std::vector<GeneratedStep> lrm;
};

inline ReplayScripts replay_scripts(const Trace& t) {
    ReplayScripts r;
    if (t.discarded_first_step) r.srm.push_back(t.discarded_first_step->step);
    for (const auto& s : t.steps) {
        (s.model == ModelChoice::SRM ? r.srm : r.lrm).push_back(s.step);
    }
    return r;
}

} // namespace tabroute
