#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tabroute/errors.hpp"
#include "tabroute/trie.hpp"

namespace tabroute {

// Predicted next-token distribution at one position. `entries` may be a
// truncated top-k slice; `coverage` is the represented probability mass and
// `full` marks distributions spanning the whole vocabulary.
struct TokenDistribution {
    std::vector<std::pair<std::int64_t, double>> entries; // (token id, probability)
    double coverage = 0.0;
    bool full = false;

    static TokenDistribution from_probs(std::span<const double> probs, bool full_vocab) {
        TokenDistribution d;
        d.full = full_vocab;
        d.entries.reserve(probs.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            d.entries.emplace_back(static_cast<std::int64_t>(i), probs[i]);
            sum += probs[i];
        }
        d.coverage = sum;
        return d;
    }
};

// Shannon entropy in nats. Truncated distributions treat the residual mass
// r = 1 - coverage as one pseudo-outcome contributing -r*ln(r).
inline double token_entropy(const TokenDistribution& dist) {
    if (dist.coverage > 1.0 + 1e-9) {
        throw input_error("token distribution coverage exceeds 1: " + std::to_string(dist.coverage));
    }
    double h = 0.0;
    for (const auto& [id, p] : dist.entries) {
        (void)id;
        if (!(p > 0.0) || p > 1.0 + 1e-9) {
            throw input_error("token probability out of (0, 1]: " + std::to_string(p));
        }
        if (p < 1.0) h -= p * std::log(p);
    }
    if (!dist.full) {
        double r = 1.0 - dist.coverage;
        if (r > 0.0) h -= r * std::log(r);
    }
    return h < 0.0 ? 0.0 : h;
}

// Per-step uncertainty, one mean per token group. A group with no tokens has
// no value; it is never zero-filled.
struct StepUncertainty {
    std::optional<double> phi_tab;
    std::optional<double> phi_text;
    std::size_t n_tab = 0;
    std::size_t n_text = 0;
};

inline StepUncertainty step_uncertainty(std::span<const double> entropies, const TokenMask& mask) {
    if (entropies.size() != mask.bits.size()) {
        throw input_error("entropy list length " + std::to_string(entropies.size()) +
                          " does not match mask length " + std::to_string(mask.bits.size()));
    }
    double sum_tab = 0.0, sum_text = 0.0;
    StepUncertainty u;
    for (std::size_t i = 0; i < entropies.size(); ++i) {
        if (mask.bits[i]) {
            sum_tab += entropies[i];
            ++u.n_tab;
        } else {
            sum_text += entropies[i];
            ++u.n_text;
        }
    }
    if (u.n_tab > 0) u.phi_tab = sum_tab / static_cast<double>(u.n_tab);
    if (u.n_text > 0) u.phi_text = sum_text / static_cast<double>(u.n_text);
    return u;
}

} // namespace tabroute
