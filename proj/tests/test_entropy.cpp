#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tabroute/entropy.hpp"

using namespace tabroute;

namespace {

TokenDistribution dist(std::vector<double> probs, bool full) {
    return TokenDistribution::from_probs(probs, full);
}

TokenDistribution random_simplex(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> exp_d(1.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) {
        v = exp_d(rng) + 1e-12;
        sum += v;
    }
    for (auto& v : p) v /= sum;
    return dist(p, true);
}

} // namespace

TEST_CASE("token_entropy of a one-hot distribution is zero") {
    CHECK(token_entropy(dist({1.0}, true)) == 0.0);
}

TEST_CASE("token_entropy of uniform over 4 tokens is ln 4") {
    double h = token_entropy(dist({0.25, 0.25, 0.25, 0.25}, true));
    CHECK(h == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(h == doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("truncated distributions lump the residual mass as one pseudo-outcome") {
    double h = token_entropy(dist({0.6, 0.3}, false));
    double want = -0.6 * std::log(0.6) - 0.3 * std::log(0.3) - 0.1 * std::log(0.1);
    CHECK(h == doctest::Approx(want).epsilon(1e-12));

    // zero residual behaves like a full distribution
    CHECK(token_entropy(dist({0.5, 0.5}, false)) ==
          doctest::Approx(token_entropy(dist({0.5, 0.5}, true))).epsilon(1e-12));
}

TEST_CASE("token_entropy rejects invalid coverage and probabilities") {
    CHECK_THROWS_AS(token_entropy(dist({0.9, 0.3}, false)), input_error);
    TokenDistribution bad;
    bad.entries = {{0, 0.0}};
    bad.coverage = 0.0;
    CHECK_THROWS_AS(token_entropy(bad), input_error);
}

TEST_CASE("token_entropy matches the textbook formula on 1000 random full distributions") {
    std::mt19937_64 rng(41);
    std::uniform_int_distribution<std::size_t> n_d(1, 40);
    for (int i = 0; i < 1000; ++i) {
        TokenDistribution d = random_simplex(rng, n_d(rng));
        CHECK(std::fabs(token_entropy(d) - oracle::shannon_entropy(d)) <= 1e-9);
    }
}

TEST_CASE("entropy bounds: 0 <= H <= ln(outcomes incl. tail)") {
    std::mt19937_64 rng(43);
    std::uniform_int_distribution<std::size_t> n_d(1, 12);
    std::uniform_real_distribution<double> scale_d(0.2, 1.0);
    for (int i = 0; i < 500; ++i) {
        std::size_t n = n_d(rng);
        TokenDistribution d = random_simplex(rng, n);
        bool truncate = i % 2 == 0;
        if (truncate) {
            double s = scale_d(rng);
            for (auto& [id, p] : d.entries) p *= s;
            d.coverage = 0.0;
            for (const auto& [id, p] : d.entries) d.coverage += p;
            d.full = false;
        }
        double h = token_entropy(d);
        std::size_t outcomes = d.entries.size() + (!d.full && d.coverage < 1.0 ? 1 : 0);
        CHECK(h >= 0.0);
        CHECK(h <= std::log(static_cast<double>(std::max<std::size_t>(outcomes, 1))) + 1e-12);
    }
}

TEST_CASE("token_entropy is invariant under entry permutation") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        TokenDistribution d = random_simplex(rng, 10);
        double h0 = token_entropy(d);
        std::shuffle(d.entries.begin(), d.entries.end(), rng);
        CHECK(token_entropy(d) == doctest::Approx(h0).epsilon(1e-13));
    }
}

TEST_CASE("step_uncertainty averages each group separately") {
    TokenMask mask;
    mask.bits = {true, true};
    StepUncertainty u = step_uncertainty(std::vector<double>{0.2, 0.4}, mask);
    REQUIRE(u.phi_tab.has_value());
    CHECK(*u.phi_tab == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_FALSE(u.phi_text.has_value());
    CHECK(u.n_tab == 2);
    CHECK(u.n_text == 0);

    TokenMask one;
    one.bits = {false};
    StepUncertainty v = step_uncertainty(std::vector<double>{0.5}, one);
    CHECK_FALSE(v.phi_tab.has_value());
    REQUIRE(v.phi_text.has_value());
    CHECK(*v.phi_text == 0.5);
}

TEST_CASE("step_uncertainty rejects length mismatch") {
    TokenMask mask;
    mask.bits = {true};
    CHECK_THROWS_AS(step_uncertainty(std::vector<double>{0.1, 0.2}, mask), input_error);
}

TEST_CASE("step_uncertainty matches a scalar-loop oracle on a random 100-token step") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> e_d(0.0, 3.0);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<double> entropies(100);
    TokenMask mask;
    for (int i = 0; i < 100; ++i) {
        entropies[static_cast<std::size_t>(i)] = e_d(rng);
        mask.bits.push_back(coin(rng) != 0);
    }
    double st = 0, sx = 0;
    std::size_t nt = 0, nx = 0;
    for (std::size_t i = 0; i < 100; ++i) {
        if (mask.bits[i]) {
            st += entropies[i];
            nt++;
        } else {
            sx += entropies[i];
            nx++;
        }
    }
    StepUncertainty u = step_uncertainty(entropies, mask);
    if (nt) CHECK(*u.phi_tab == doctest::Approx(st / nt).epsilon(1e-12));
    if (nx) CHECK(*u.phi_text == doctest::Approx(sx / nx).epsilon(1e-12));
}

TEST_CASE("concatenation: step uncertainty is the count-weighted mean of parts") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> e_d(0.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(7), b(5);
        for (auto& v : a) v = e_d(rng);
        for (auto& v : b) v = e_d(rng);
        TokenMask ma, mb, mc;
        ma.bits.assign(7, true);
        mb.bits.assign(5, true);
        mc.bits.assign(12, true);
        std::vector<double> c = a;
        c.insert(c.end(), b.begin(), b.end());
        double ua = *step_uncertainty(a, ma).phi_tab;
        double ub = *step_uncertainty(b, mb).phi_tab;
        double uc = *step_uncertainty(c, mc).phi_tab;
        CHECK(uc == doctest::Approx((7 * ua + 5 * ub) / 12.0).epsilon(1e-12));
    }
}
