#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include <json.hpp>

#include "tabroute/errors.hpp"

namespace tabroute {

enum class Signal { tab, text };

inline const char* to_string(Signal s) { return s == Signal::tab ? "tab" : "text"; }

inline Signal signal_from_string(const std::string& s) {
    if (s == "tab") return Signal::tab;
    if (s == "text") return Signal::text;
    throw parse_error("unknown signal: " + s);
}

// Numerically clamped so the result is strictly inside (0, 1) for every
// finite input; monotonicity in x is preserved.
inline double sigmoid(double x) {
    double v = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : [](double e) { return e / (1.0 + e); }(std::exp(x));
    const double hi = std::nextafter(1.0, 0.0);
    const double lo = std::numeric_limits<double>::min();
    if (v > hi) v = hi;
    if (v < lo) v = lo;
    return v;
}

// Calibrated uncertainty-to-risk mapping for one signal type:
// risk = sigmoid(a * phi + b).
struct RiskMapping {
    double a = 0.0;
    double b = 0.0;
    Signal signal = Signal::text;
    double fit_loss = 0.0;
    std::size_t n_samples = 0;

    bool operator==(const RiskMapping&) const = default;
};

inline double apply_mapping(const RiskMapping& mapping, double phi) {
    if (!std::isfinite(phi)) throw input_error("phi must be finite");
    return sigmoid(mapping.a * phi + mapping.b);
}

inline nlohmann::json mapping_to_json(const RiskMapping& m, const std::string& created_at) {
    return nlohmann::json{{"schema", "risk-mapping/1"},
                          {"signal", to_string(m.signal)},
                          {"a", m.a},
                          {"b", m.b},
                          {"fit_loss", m.fit_loss},
                          {"n_samples", m.n_samples},
                          {"created_at", created_at}};
}

inline RiskMapping mapping_from_json(const nlohmann::json& j) {
    RiskMapping m;
    try {
        m.signal = signal_from_string(j.at("signal").get<std::string>());
        m.a = j.at("a").get<double>();
        m.b = j.at("b").get<double>();
        m.fit_loss = j.value("fit_loss", 0.0);
        m.n_samples = j.value("n_samples", std::size_t{0});
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed risk mapping JSON: ") + e.what());
    }
    return m;
}

} // namespace tabroute
