#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include "tabroute/errors.hpp"

namespace tabroute {

enum class ModelChoice { SRM, LRM };

inline const char* to_string(ModelChoice c) { return c == ModelChoice::SRM ? "SRM" : "LRM"; }

inline ModelChoice model_choice_from_string(const std::string& s) {
    if (s == "SRM") return ModelChoice::SRM;
    if (s == "LRM") return ModelChoice::LRM;
    throw parse_error("unknown model choice: " + s);
}

namespace detail {
inline double check_risk(double d, const char* name) {
    if (!(d >= 0.0 && d <= 1.0)) {
        throw input_error(std::string(name) + " must be in [0, 1]");
    }
    return d;
}
} // namespace detail

// Noisy-OR fusion of the two failure risks:
//   d_final = 1 - (1 - d_tab)(1 - d_text),
// computed as d_tab + d_text - d_tab*d_text and clamped to its algebraic
// bounds max(d_tab, d_text) <= d_final <= min(1, d_tab + d_text). An absent
// signal contributes no evidence of risk and fuses as 0, the identity.
inline double fuse(std::optional<double> d_tab, std::optional<double> d_text) {
    if (!d_tab && !d_text) {
        throw input_error("fuse requires at least one risk (step had no tokens)");
    }
    double a = d_tab ? detail::check_risk(*d_tab, "d_tab") : 0.0;
    double b = d_text ? detail::check_risk(*d_text, "d_text") : 0.0;
    double d = a + b - a * b;
    double lo = std::max(a, b);
    double hi = std::min(1.0, a + b);
    return std::clamp(d, lo, hi);
}

// Strict exceedance routes to the LRM; ties stay on the SRM.
inline ModelChoice decide(double d_final, double tau) {
    detail::check_risk(d_final, "d_final");
    detail::check_risk(tau, "tau");
    return d_final > tau ? ModelChoice::LRM : ModelChoice::SRM;
}

// Scores and the decision taken for one step, as recorded in traces.
struct RoutingDecision {
    std::optional<double> d_tab;
    std::optional<double> d_text;
    double d_final = 0.0;
    double tau = 0.0;
    ModelChoice choice = ModelChoice::SRM;
};

inline RoutingDecision route(std::optional<double> d_tab, std::optional<double> d_text, double tau) {
    RoutingDecision r;
    r.d_tab = d_tab;
    r.d_text = d_text;
    r.d_final = fuse(d_tab, d_text);
    r.tau = tau;
    r.choice = decide(r.d_final, tau);
    return r;
}

} // namespace tabroute
