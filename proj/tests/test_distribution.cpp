#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hlat/distribution.hpp"
#include "hlat/moments.hpp"

using namespace hlat;
using namespace hlat::distribution;

namespace {

// Average of e^{2πiαφ_{D,K}(t)} over one period, evaluating the series point by
// point. The integrand is smooth and periodic, so the trapezoid rule converges
// geometrically in the number of points.
cplx oracle_factor(int q, std::uint64_t m, cplx alpha, std::uint64_t D, std::uint64_t K, std::size_t per_unit) {
    phi::PhiSeries s(q, m, D, K);
    const std::uint64_t P = s.period();
    const std::size_t N = P * per_unit;
    double re = 0, im = 0;
    for (std::size_t j = 0; j < N; ++j) {
        cplx z = std::exp(cplx(0, 2 * std::numbers::pi) * alpha * s(double(j) / double(per_unit)));
        re += z.real();
        im += z.imag();
    }
    return cplx(re, im) / double(N);
}

}  // namespace

TEST_CASE("factor at the origin and for vanishing components") {
    for (int q : {3, 4, 5}) {
        CHECK(char_factor(q, 0.0, 1) == cplx(1.0, 0.0));
        CHECK(char_factor(q, 0.37, 3) == cplx(1.0, 0.0));
        CHECK(char_factor(q, cplx(0.1, 0.2), 4) == cplx(1.0, 0.0));
        for (double s : {0.01, 0.05, 0.2, 1.0}) CHECK(std::abs(char_factor(q, s, 1)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("factor matches a point-by-point period average") {
    const CharOptions opt{.D = 4, .K = 8};
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5})
            for (double s : {0.01, 0.07, 0.25}) {
                cplx o = oracle_factor(q, m, s, 4, 8, 2048);
                cplx c = char_factor(q, s, m, opt);
                CHECK(std::abs(c - o) < 1e-10);
            }
    // imaginary argument: E[e^{−2πyφ}] is real and at least 1 (φ has mean 0)
    cplx o = oracle_factor(3, 1, cplx(0, 0.02), 4, 8, 2048);
    cplx c = char_factor(3, cplx(0, 0.02), 1, opt);
    CHECK(std::abs(c - o) < 1e-10 * std::abs(o));
    CHECK(std::fabs(c.imag()) < 1e-12 * c.real());
    CHECK(c.real() >= 1.0);
}

TEST_CASE("binned evaluation on a grid agrees with direct evaluation") {
    const CharOptions opt{.D = 6, .K = 12};
    for (std::uint64_t m : {1, 2, 13}) {
        const double h = 0.004;
        auto g = char_factor_grid(3, m, h, 80, opt);
        REQUIRE(g.values.size() == 81);
        CHECK(g.values[0] == cplx(1.0, 0.0));
        CHECK(g.mean_square == doctest::Approx(phi::PhiSeries(3, m, 6, 12).mean_square()).epsilon(1e-12));
        for (std::size_t j : {1, 7, 40, 80}) CHECK(std::abs(g.values[j] - char_factor(3, double(j) * h, m, opt)) < 1e-10);
        auto neg = char_factor_grid(3, m, -h, 80, opt);
        for (std::size_t j = 0; j <= 80; ++j) CHECK(std::abs(neg.values[j] - std::conj(g.values[j])) < 1e-12);
    }
}

TEST_CASE("small-σ expansion recovers the mean square") {
    const CharOptions opt{.D = 6, .K = 12};
    const double s = 1e-3;
    for (std::uint64_t m : {1, 5}) {
        const double ms = phi::PhiSeries(4, m, 6, 12).mean_square();
        auto quotient = [&](double x) {
            return (1.0 - char_factor(4, x, m, opt).real()) / (2 * std::numbers::pi * std::numbers::pi * x * x);
        };
        // the quotient is ms − O(σ²); one Richardson step removes the σ² term
        const double est = (4 * quotient(s / 2) - quotient(s)) / 3;
        CHECK(est == doctest::Approx(ms).epsilon(1e-6));
    }
}

TEST_CASE("product over m with the Gaussian completion") {
    auto cf = char_function(3, 20, 0.01, 30);
    REQUIRE(cf.values.size() == 31);
    CHECK(cf.values[0] == cplx(1.0, 0.0));
    CHECK(cf.variance_total == doctest::Approx(moments::variance_total(3)).epsilon(1e-15));
    CHECK(cf.captured_variance + cf.completion_variance == doctest::Approx(cf.variance_total).epsilon(1e-12));
    CHECK(cf.completion_variance > 0);
    for (std::size_t j : {5, 17, 30}) CHECK(std::abs(cf.values[j] - char_function_at(3, 0.01 * double(j), 20)) < 1e-10);
    auto neg = char_function(3, 20, -0.01, 30);
    for (std::size_t j = 0; j <= 30; ++j) CHECK(std::abs(neg.values[j] - std::conj(cf.values[j])) < 1e-10);
    for (std::size_t j = 1; j <= 30; ++j) CHECK(std::abs(cf.values[j]) < std::abs(cf.values[j - 1]));
    CHECK(cf.tail_shape_coefficient > 0);
}

TEST_CASE("density invariants for q = 3") {
    auto g = density(3);
    auto mom = cdf_and_moments(g, 4);
    const double V = moments::variance_total(3);
    MESSAGE("A=" << g.A << " mass=" << mom.raw[0] << " mean=" << mom.raw[1] << " m2=" << mom.raw[2]
                 << " m3=" << mom.raw[3] << " minP=" << mom.min_P);
    CHECK(g.Phi[0] == cplx(1.0, 0.0));
    CHECK(std::fabs(mom.raw[0] - 1) < 1e-3);
    CHECK(std::fabs(mom.raw[1]) < 1e-3);
    CHECK(mom.raw[2] == doctest::Approx(V).epsilon(0.02));
    CHECK(mom.raw[3] < 0);
    CHECK(mom.min_P >= -1e-8);
    CHECK(mom.abs1 > 0);
    CHECK(mom.abs2 == doctest::Approx(mom.raw[2]).epsilon(1e-12));
    for (std::size_t i = 1; i < mom.cdf.size(); ++i) REQUIRE(mom.cdf[i] >= mom.cdf[i - 1]);
    CHECK(mom.cdf.front() == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(mom.cdf.back() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(g.P.front() < 1e-8);
    CHECK(g.P.back() < 1e-8);
    CHECK(g.total_error > 0);
    CHECK(g.total_error < 1e-5);

    auto b = moment_budget(3, g, mom);
    for (int j = 0; j < 4; ++j) {
        CHECK(b.value[j] == mom.raw[j]);
        CHECK(b.budget[j] > 0);
    }
    CHECK(b.model_m3 < 0);
    CHECK(std::fabs(b.model_m3 - mom.raw[3]) < 1e-3 * std::fabs(b.model_m3));

    // beyond the 0.01% quantiles on either side P is below 1e-4
    double lo = g.x.front(), hi = g.x.back();
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        if (mom.cdf[i] < 1e-4) lo = g.x[i];
        if (mom.cdf[i] < 1 - 1e-4) hi = g.x[i];
    }
    for (std::size_t i = 0; i < g.x.size(); ++i)
        if (g.x[i] < lo || g.x[i] > hi) CHECK(g.P[i] < 1e-4);
    const auto peak = std::max_element(g.P.begin(), g.P.end()) - g.P.begin();
    MESSAGE("argmax of P at x = " << g.x[peak]);

    // quadrature moments against the composition values
    auto c2 = moments::density_moment(3, 2, g.M);
    CHECK(std::fabs(c2.value - mom.raw[2]) <= c2.error_estimate + 0.02 * mom.raw[2]);
    auto c3 = moments::density_moment(3, 3, g.M);
    CHECK(c3.value < 0);
    CHECK(c3.value == doctest::Approx(mom.raw[3]).epsilon(0.10));
}

TEST_CASE("numerical knobs move P by less than the reported error") {
    auto base = density(3);
    DensityOptions o;
    o.M = base.M;
    o.A = base.A;
    o.sigma_step = base.sigma_step;
    o.x_min = base.x_min;
    o.x_max = base.x_max;
    o.x_step = base.step;
    auto wideA = o;
    wideA.A *= 2;
    auto fine = o;
    fine.sigma_step /= 2;
    for (const auto& v : {wideA, fine}) {
        auto g = density(3, v);
        REQUIRE(g.P.size() == base.P.size());
        double d = 0;
        for (std::size_t i = 0; i < g.P.size(); ++i) d = std::max(d, std::fabs(g.P[i] - base.P[i]));
        CHECK(d < base.total_error);
    }
}

TEST_CASE("|Φ| falls off without the Gaussian completion") {
    // pure product over m ≤ 60; resolved down to the 1e-12 level of the factor quadrature
    auto cf = char_function(3, 60, 0.05, 40, {}, false);
    double prev = 2;
    for (auto [a, b] : {std::pair{1, 5}, {5, 10}, {10, 20}, {20, 40}}) {
        double mx = 0;
        for (int j = a; j <= b; ++j) mx = std::max(mx, std::abs(cf.values[j]));
        CHECK(mx < prev);
        prev = mx;
    }
    CHECK(std::abs(cf.values[40]) < 1e-12);
}

TEST_CASE("density for q = 4 keeps its mass and the Gaussian part") {
    auto g = density(4, {.M = 20});
    auto mom = cdf_and_moments(g, 2);
    CHECK(std::fabs(mom.raw[0] - 1) < 1e-3);
    CHECK(mom.raw[2] == doctest::Approx(moments::variance_total(4)).epsilon(0.02));
    CHECK(g.completion_variance > 0);
}

TEST_CASE("cutoff and step checks") {
    CHECK_THROWS_AS(density(3, {.M = 10, .A = 0.02}), CutoffTooSmall);
    CHECK_THROWS_AS(density(3, {.M = 10, .A = 0.5, .x_step = 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(char_factor(2, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(char_factor_grid(3, 1, 0.01, 10, {.D = 30, .K = 30, .max_samples = 1000}), BudgetError);
}
