#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hlat/phi.hpp"

using namespace hlat;
using hlat::phi::PhiSeries;
using hlat::phi::PhiTruncation;
using hlat::phi::L2Tail;
using hlat::phi::lcm_upto;
using hlat::phi::phi_truncated;
using hlat::phi::tail_bound_for;
using hlat::phi::truncation_for;
using hlat::phi::l2_tail_bound;
using hlat::phi::partial_sum_phi;
using hlat::phi::uniform_bound_ratio;
constexpr auto phi_at = [](int q, std::uint64_t m, double t, const PhiTruncation& tr) { return hlat::phi::phi(q, m, t, tr); };

namespace {

// Direct transcription of the series with weighted counts from a box loop.
double oracle_r2w(long n, long d, int q, bool twisted) {
    long top = long(std::sqrt(double(n))) + 1;
    double s = 0;
    for (long a = -top; a <= top; ++a)
        for (long b = -top; b <= top; ++b) {
            if (a * a + b * b != n || b % d != 0) continue;
            double w = std::pow(std::fabs(double(a)) / std::sqrt(double(n)), q - 1);
            if (twisted) {
                long aa = std::labs(a);
                w *= (aa % 2 == 0) ? 0 : (aa % 4 == 1 ? 1 : -1);
            }
            s += w;
        }
    return s;
}

double oracle_phi(int q, long m, double t, long D, long K) {
    const double pi = std::numbers::pi;
    bool sqfree_ok = true;
    for (long p = 2; p <= m; ++p) {
        if (m % (p * p) == 0) sqfree_ok = false;
        if (m % p == 0 && p % 4 == 3) {
            bool prime = true;
            for (long f = 2; f * f <= p; ++f)
                if (p % f == 0) prime = false;
            if (prime) sqfree_ok = false;
        }
    }
    if (!sqfree_ok) return 0.0;
    double sum = 0;
    for (long d = 1; d <= D; ++d)
        for (long k = 1; k <= K; ++k) {
            long n = m * k * k;
            double dec = std::pow(double(d), q - 1.5) * std::pow(double(k), 1.5);
            double arg = 2 * pi * double(k) / double(d) * t - pi / 4;
            if (q % 2 == 0) {
                sum += arith::xi(d, q) * oracle_r2w(n, d, q, false) / dec * std::sin(arg);
            } else {
                int chi = d % 2 == 0 ? 0 : (d % 4 == 1 ? 1 : -1);
                sum += chi * oracle_r2w(n, d, q, false) / dec * std::sin(arg);
                if (d % 4 == 0) {
                    double sign = (((q + 1) / 2) % 2 == 0) ? 1 : -1;
                    sum += sign * std::ldexp(1.0, q) * oracle_r2w(n, d, q, true) / dec * std::cos(arg);
                }
            }
        }
    double pre = (q % 2 == 0) ? arith::rho_q(q) / (2 * pi) : std::ldexp(1.0, q - 2) * arith::rho_chi(q) / pi;
    return pre / std::pow(double(m), 0.75) * sum;
}

}  // namespace

TEST_CASE("vanishing components") {
    for (int q : {3, 4, 5})
        for (std::uint64_t m : {3, 4, 7, 8, 9, 12, 18, 21})
            for (double t : {0.0, 0.3, 17.25}) CHECK(phi_at(q, m, t, {16, 16, 0}) == 0.0);
    CHECK(tail_bound_for(3, 4, 8, 8) == 0.0);
    CHECK(l2_tail_bound(3, 9, 8, 8).norm() == 0.0);
}

TEST_CASE("series matches a direct transcription") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int q : {3, 4, 5, 6})
        for (long m : {1, 2, 5, 10})
            for (int i = 0; i < 4; ++i) {
                double t = u(rng);
                PhiSeries s(q, m, 12, 10);
                REQUIRE(s(t) == doctest::Approx(oracle_phi(q, m, t, 12, 10)).epsilon(1e-11).scale(1.0));
            }
    // the reference point used below
    double v = PhiSeries(3, 1, 64, 64)(0.0);
    CHECK(v == doctest::Approx(oracle_phi(3, 1, 0.0, 64, 64)).epsilon(1e-11));
}

TEST_CASE("truncated series: periodicity and index-set identity") {
    const std::uint64_t n = 8, L = lcm_upto(n);
    CHECK(L == 840);
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5})
            for (double t : {0.1, 3.7, 123.456}) {
                CHECK(phi_truncated(q, m, t, n, 20) ==
                      doctest::Approx(phi_truncated(q, m, t + double(L), n, 20)).epsilon(1e-12).scale(1.0));
                CHECK(phi_truncated(q, m, t, 16, 20) == phi_at(q, m, t, {16, 20, 0}));
            }
    CHECK_THROWS_AS(lcm_upto(128), PeriodOverflow);
    CHECK(lcm_upto(40) == 5342931457063200ull);
}

TEST_CASE("tail bound certifies the truncation") {
    const double b64 = tail_bound_for(3, 1, 64, 64);
    const double b128 = tail_bound_for(3, 1, 128, 64);
    CHECK(b128 < b64);
    CHECK(tail_bound_for(3, 1, 64, 128) < b64);
    CHECK(truncation_for(3, 1, 64, 64).tail_bound == b64);

    PhiSeries lo(3, 1, 64, 64), hi(3, 1, 256, 256);
    const std::size_t N = 10000;
    std::vector<double> t(N), diff(N);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1e4);
    for (auto& x : t) x = u(rng);
    parallel_for(N, [&](std::size_t i) { diff[i] = std::fabs(hi(t[i]) - lo(t[i])); });
    double worst = *std::max_element(diff.begin(), diff.end());
    MESSAGE("max |phi_at(256) - phi_at(64)| = " << worst << ", bound = " << b64);
    CHECK(worst <= b64);
    CHECK(std::fabs(hi(0.0) - lo(0.0)) <= b64);
}

TEST_CASE("mean square equals the period average") {
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5}) {
            PhiSeries s(q, m, 6, 5);
            const double P = double(s.period());  // 60
            const std::size_t N = 60 * 12;      // > 2·max frequency·P
            CompensatedSum acc;
            for (std::size_t j = 0; j < N; ++j) {
                double v = s(P * double(j) / double(N));
                acc += v * v;
            }
            CHECK(acc.value() / double(N) == doctest::Approx(s.mean_square()).epsilon(1e-12));
        }
}

TEST_CASE("L2 tail bound covers deeper truncations") {
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5}) {
            PhiSeries lo(q, m, 16, 16), hi(q, m, 128, 128);
            L2Tail tb = l2_tail_bound(q, m, 16, 16);
            double gap = hi.mean_square() - lo.mean_square();
            double allowed = tb.mean_square_error(std::sqrt(lo.mean_square()));
            CHECK(std::fabs(gap) <= allowed);
            CHECK(tb.out_sq > 0);
            L2Tail deeper = l2_tail_bound(q, m, 64, 64);
            CHECK(deeper.norm() < tb.norm());
        }
}

TEST_CASE("partial sums over m") {
    std::vector<double> xs{1.0, 1.7, 3.2, 10.5};
    PhiTruncation tr{24, 24, 0};
    auto one = partial_sum_phi(3, 1, xs, tr);
    auto four = partial_sum_phi(3, 4, xs, tr);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(one[i] == doctest::Approx(phi_at(3, 1, xs[i] * xs[i], tr)).epsilon(1e-14));
        double manual = phi_at(3, 1, xs[i] * xs[i], tr) + phi_at(3, 2, std::sqrt(2.0) * xs[i] * xs[i], tr);
        CHECK(four[i] == doctest::Approx(manual).epsilon(1e-13));
    }
    // grid mean over [X, 2X] is small against the spread (σ ≈ 6.6 here); the
    // grid itself contributes noise of order σ/√n
    std::vector<double> grid;
    const int n = 40000;
    for (int i = 0; i < n; ++i) grid.push_back(100.0 * (1 + i / double(n)));
    auto v = partial_sum_phi(3, 10, grid, tr);
    double mean = pairwise_sum(v) / double(n);
    double m2 = 0;
    for (double x : v) m2 += x * x / n;
    CHECK(std::fabs(mean) < 0.02 * std::sqrt(m2));
}

TEST_CASE("uniform bound constant is stable across m") {
    std::vector<double> ts;
    for (int i = 0; i < 3000; ++i) ts.push_back(0.37 * i);
    double a = 0;
    for (std::uint64_t m : {1, 2, 5, 10, 13, 17, 26, 29}) {
        double r = uniform_bound_ratio(PhiSeries(3, m, 48, 48), ts);
        CHECK(r > 0);
        a = std::max(a, r);
    }
    MESSAGE("measured a_emp (q=3) = " << a);
    CHECK(a < 10);
}
