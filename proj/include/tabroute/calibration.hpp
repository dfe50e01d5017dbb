#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabroute/errors.hpp"
#include "tabroute/io.hpp"
#include "tabroute/pipeline.hpp"
#include "tabroute/risk.hpp"

namespace tabroute {

// One step-level fitting sample from suffix-replacement labeling. label 1
// marks the critical routing boundary step; 0 marks an earlier retained step.
struct CalibrationSample {
    std::optional<double> phi_tab;
    std::optional<double> phi_text;
    int label = 0;
    std::string trace_id;
    int step_index = 0;
};

struct LabelingConfig {
    int max_suffix_cap = 8;  // M = min(T - 1, cap)
    int repeats = 5;         // k regenerations per suffix length
    double flip_ratio = 0.8; // gamma; stable flip needs >= ceil(gamma * k) incorrect runs

    void validate() const {
        if (max_suffix_cap < 1) throw input_error("max_suffix_cap must be positive");
        if (repeats < 1) throw input_error("repeats must be positive");
        if (!(flip_ratio > 0.0 && flip_ratio <= 1.0)) throw input_error("flip_ratio must be in (0, 1]");
    }
    int required_incorrect() const {
        return static_cast<int>(std::ceil(flip_ratio * repeats - 1e-9));
    }
};

// A retained validation trajectory: correct under the LRM alone, incorrect
// under the SRM alone. Filtering is the caller's responsibility.
struct CalibrationTrace {
    Trace trace;
    std::string gold_answer;
};

// Regenerates the suffix after `prefix_len` kept steps with the SRM and
// returns the final answer (nothing when the run produced none).
using SuffixRunner =
    std::function<std::optional<std::string>(const Trace&, std::size_t prefix_len, int repeat)>;

using AnswerEvaluator = std::function<bool(const std::string& predicted, const std::string& gold)>;

struct LabelingResult {
    std::vector<CalibrationSample> samples;
    std::size_t traces_retained = 0;   // contributed a boundary
    std::size_t traces_excluded = 0;   // no stable flip within M
    std::size_t traces_skipped = 0;    // too short (T < 2)
    std::vector<std::string> warnings;
};

// Suffix-replacement label construction. For each trace of T steps and
// m = 1..M ascending, the SRM regenerates the last m steps `repeats` times; a
// stable flip needs at least ceil(gamma*k) incorrect runs. The search stops at
// the smallest flipping m*, the boundary step b = T - m* is the positive
// sample, steps before it are negatives, later steps are discarded. Traces
// with no stable flip contribute nothing.
inline LabelingResult build_labels(std::span<const CalibrationTrace> traces,
                                   const SuffixRunner& runner, const AnswerEvaluator& evaluator,
                                   const LabelingConfig& cfg = {}) {
    cfg.validate();
    LabelingResult result;
    const int needed = cfg.required_incorrect();
    for (const auto& [trace, gold] : traces) {
        const int total = static_cast<int>(trace.steps.size());
        if (total < 2) {
            result.traces_skipped++;
            result.warnings.push_back("trace '" + trace.query_id + "' has " + std::to_string(total) +
                                      " step(s); need at least 2 for suffix replacement");
            continue;
        }
        const int max_suffix = std::min(total - 1, cfg.max_suffix_cap);
        std::optional<int> flip_len;
        for (int m = 1; m <= max_suffix && !flip_len; ++m) {
            int incorrect = 0;
            for (int r = 0; r < cfg.repeats; ++r) {
                std::optional<std::string> answer =
                    runner(trace, static_cast<std::size_t>(total - m), r);
                if (!answer || !evaluator(*answer, gold)) ++incorrect;
            }
            if (incorrect >= needed) flip_len = m;
        }
        if (!flip_len) {
            result.traces_excluded++;
            continue;
        }
        const int boundary = total - *flip_len;
        const StepRecord& boundary_step = trace.steps[static_cast<std::size_t>(boundary - 1)];
        if (!boundary_step.phi_tab && !boundary_step.phi_text) {
            // no signals on the positive step: nothing usable from this trace
            result.traces_excluded++;
            result.warnings.push_back("trace '" + trace.query_id + "' boundary step " +
                                      std::to_string(boundary) + " has no uncertainty signals");
            continue;
        }
        for (int i = 1; i <= boundary; ++i) {
            const StepRecord& step = trace.steps[static_cast<std::size_t>(i - 1)];
            if (!step.phi_tab && !step.phi_text) {
                result.warnings.push_back("trace '" + trace.query_id + "' step " + std::to_string(i) +
                                          " has no uncertainty signals; sample dropped");
                continue;
            }
            CalibrationSample s;
            s.phi_tab = step.phi_tab;
            s.phi_text = step.phi_text;
            s.label = i == boundary ? 1 : 0;
            s.trace_id = trace.query_id;
            s.step_index = i;
            result.samples.push_back(std::move(s));
        }
        result.traces_retained++;
    }
    return result;
}

namespace detail {

inline double bce_loss(std::span<const double> xs, std::span<const int> ys, double a, double b) {
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double p = sigmoid(a * xs[i] + b);
        loss -= ys[i] ? std::log(p) : std::log1p(-p);
    }
    return loss;
}

} // namespace detail

// Fits risk = sigmoid(a*phi + b) by minimizing binary cross-entropy with
// damped Newton steps (gradient-descent fallback). The start point is the
// best constant predictor (a = 0, b = logit of the positive rate), so the
// final loss never exceeds it. Converges at gradient norm < 1e-8 or stops
// after 10,000 iterations.
inline RiskMapping fit_sigmoid(std::span<const CalibrationSample> samples, Signal signal) {
    std::vector<double> xs;
    std::vector<int> ys;
    for (const auto& s : samples) {
        const std::optional<double>& phi = signal == Signal::tab ? s.phi_tab : s.phi_text;
        if (!phi) continue; // steps lacking this signal are skipped for this fit
        xs.push_back(*phi);
        ys.push_back(s.label ? 1 : 0);
    }
    std::size_t n_pos = 0;
    for (int y : ys) n_pos += y;
    if (xs.empty() || n_pos == 0 || n_pos == ys.size()) {
        throw calibration_error(std::string("cannot fit '") + to_string(signal) +
                                "' mapping: need at least one positive and one negative sample");
    }

    double pos_rate = static_cast<double>(n_pos) / static_cast<double>(ys.size());
    double a = 0.0;
    double b = std::log(pos_rate / (1.0 - pos_rate));
    double loss = detail::bce_loss(xs, ys, a, b);

    const int max_iters = 10000;
    const double grad_tol = 1e-8;
    double damping = 1e-8;
    for (int iter = 0; iter < max_iters; ++iter) {
        double g0 = 0.0, g1 = 0.0;        // d/da, d/db
        double h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double p = sigmoid(a * xs[i] + b);
            double err = p - ys[i];
            double w = p * (1.0 - p);
            g0 += err * xs[i];
            g1 += err;
            h00 += w * xs[i] * xs[i];
            h01 += w * xs[i];
            h11 += w;
        }
        if (std::sqrt(g0 * g0 + g1 * g1) < grad_tol) break;

        bool stepped = false;
        for (int attempt = 0; attempt < 40 && !stepped; ++attempt) {
            double d00 = h00 + damping, d11 = h11 + damping;
            double det = d00 * d11 - h01 * h01;
            double da, db;
            if (det > 1e-300) {
                da = -(d11 * g0 - h01 * g1) / det;
                db = -(-h01 * g0 + d00 * g1) / det;
            } else { // degenerate curvature: plain gradient direction
                da = -g0;
                db = -g1;
            }
            double trial = detail::bce_loss(xs, ys, a + da, b + db);
            if (trial <= loss) {
                a += da;
                b += db;
                loss = trial;
                damping = std::max(damping / 10.0, 1e-12);
                stepped = true;
            } else {
                damping *= 10.0;
            }
        }
        if (!stepped) break; // no descent direction left at any damping
    }

    RiskMapping m;
    m.a = a;
    m.b = b;
    m.signal = signal;
    m.fit_loss = loss;
    m.n_samples = xs.size();
    return m;
}

// ---------------------------------------------------------------------------
// Sample persistence (JSONL audit dumps)
// ---------------------------------------------------------------------------

inline nlohmann::json sample_to_json(const CalibrationSample& s) {
    return nlohmann::json{{"phi_tab", s.phi_tab ? nlohmann::json(*s.phi_tab) : nlohmann::json(nullptr)},
                          {"phi_text", s.phi_text ? nlohmann::json(*s.phi_text) : nlohmann::json(nullptr)},
                          {"label", s.label},
                          {"trace_id", s.trace_id},
                          {"step_index", s.step_index}};
}

inline CalibrationSample sample_from_json(const nlohmann::json& j) {
    CalibrationSample s;
    try {
        if (!j.at("phi_tab").is_null()) s.phi_tab = j.at("phi_tab").get<double>();
        if (!j.at("phi_text").is_null()) s.phi_text = j.at("phi_text").get<double>();
        s.label = j.at("label").get<int>();
        s.trace_id = j.value("trace_id", std::string{});
        s.step_index = j.value("step_index", 0);
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed calibration sample: ") + e.what());
    }
    return s;
}

inline std::string samples_to_jsonl(std::span<const CalibrationSample> samples) {
    std::string out;
    for (const auto& s : samples) {
        out += sample_to_json(s).dump();
        out += '\n';
    }
    return out;
}

inline std::vector<CalibrationSample> samples_from_jsonl(const std::string& content) {
    std::vector<CalibrationSample> samples;
    for_each_jsonl_line(content, [&](std::size_t line_no, const std::string& line) {
        try {
            samples.push_back(sample_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw parse_error("samples line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return samples;
}

} // namespace tabroute
