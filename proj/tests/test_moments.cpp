#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "hlat/moments.hpp"

using namespace hlat;
using namespace hlat::moments;

namespace {

// Representations n = a² + b² with a, b ∈ ℤ, by a direct scan.
std::vector<std::pair<long, long>> oracle_reps(long n) {
    std::vector<std::pair<long, long>> out;
    for (long a = -n; a <= n; ++a) {
        if (a * a > n) continue;
        long r = n - a * a, b = long(std::sqrt(double(r)));
        while (b * b > r) --b;
        while ((b + 1) * (b + 1) <= r) ++b;
        if (b * b != r) continue;
        out.push_back({a, b});
        if (b != 0) out.push_back({a, -b});
    }
    return out;
}

// r₂(n,d;q) (or the χ(|a|)-twisted r₂,χ): Σ over representations with d | b of (|a|/√n)^{q−1}.
double oracle_r2w(const std::vector<std::pair<long, long>>& reps, long n, long d, int q, bool twisted) {
    double s = 0;
    for (auto [a, b] : reps) {
        if (b % d != 0) continue;
        double w = std::pow(std::fabs(double(a)) / std::sqrt(double(n)), q - 1);
        if (twisted) {
            long aa = std::labs(a);
            w *= (aa % 2 == 0) ? 0 : (aa % 4 == 1 ? 1 : -1);
        }
        s += w;
    }
    return s;
}

bool oracle_squarefree(long m) {
    for (long p = 2; p * p <= m; ++p)
        if (m % (p * p) == 0) return false;
    return true;
}

// 𝔯(mk²,d;q) case by case.
double oracle_frak(long m, long k, long d, int q) {
    if (std::gcd(k, d) != 1 || d % 4 == 2) return 0;
    const long n = m * k * k;
    auto reps = oracle_reps(n);
    if (d % 2 == 1) {
        double r = oracle_r2w(reps, n, d, q, false);
        if (q % 2 == 0) return r;
        return (d % 4 == 1 ? 1 : -1) * r;
    }
    if (q % 2 == 0) return ((q / 2) % 2 == 0 ? 1 : -1) * std::ldexp(1.0, q) * oracle_r2w(reps, n, d, q, false);
    return (((q - 1) / 2) % 2 == 0 ? 1 : -1) * std::ldexp(1.0, q) * oracle_r2w(reps, n, d, q, true);
}

// Q(m,ℓ) truncated to d_i ≤ D, k_i ≤ K: a plain loop over all ℓ-tuples of
// signed atoms, keeping those with Σ e_i ε(d_i)k_i/d_i = 0 (cleared by lcm(1..D)).
double oracle_moment(int q, long m, int l, long D, long K) {
    if (!oracle_squarefree(m)) return 0;
    struct Atom {
        long num;  // e·ε(d)·k·(L/d)
        int e;
        double v;
    };
    long L = 1;
    for (long d = 2; d <= D; ++d) L = std::lcm(L, d);
    std::vector<Atom> atoms;
    for (long d = 1; d <= D; ++d)
        for (long k = 1; k <= K; ++k) {
            double fr = oracle_frak(m, k, d, q);
            if (fr == 0) continue;
            const int eps = (q % 2 == 1 && d % 2 == 0) ? -1 : 1;
            const double v = fr / (std::pow(double(d), q - 1.5) * std::pow(double(k), 1.5));
            for (int e : {1, -1}) atoms.push_back({e * eps * k * (L / d), e, v});
        }
    const std::size_t A = atoms.size();
    double total = 0;
    std::vector<std::size_t> idx(l, 0);
    while (true) {
        long num = 0;
        int esum = 0;
        double prod = 1;
        for (int i = 0; i < l; ++i) {
            num += atoms[idx[i]].num;
            esum += atoms[idx[i]].e;
            prod *= atoms[idx[i]].v;
        }
        if (num == 0) total += std::cos(esum * std::numbers::pi / 4) * prod;
        int i = 0;
        while (i < l && ++idx[i] == A) idx[i++] = 0;
        if (i == l) break;
    }
    const double c = std::pow(std::numbers::pi, q - 1) / (4 * std::tgamma(double(q)));
    return std::pow(-c, l) / std::pow(double(m), 0.75 * l) * total;
}

// Σ_{mk² ≤ N} of the ℓ = 2 terms (only the pairs (d,k,e), (d,k,−e) meet the
// constraint), d summed to Dmax.
double oracle_variance_partial(int q, long N, long Dmax) {
    const double c = std::pow(std::numbers::pi, q - 1) / (4 * std::tgamma(double(q)));
    double s = 0;
    for (long m = 1; m <= N; ++m) {
        if (!oracle_squarefree(m)) continue;
        for (long k = 1; m * k * k <= N; ++k)
            for (long d = 1; d <= Dmax; ++d) {
                double fr = oracle_frak(m, k, d, q);
                if (fr != 0) s += 2 * c * c * fr * fr / (std::pow(double(d), 2 * q - 3) * std::pow(double(m * k * k), 1.5));
            }
    }
    return s;
}

std::vector<std::uint64_t> support_upto(std::uint64_t M) {
    std::vector<std::uint64_t> v;
    for (std::uint64_t m = 1; m <= M; ++m)
        if (arith::phi_support(m)) v.push_back(m);
    return v;
}

}  // namespace

TEST_CASE("moments that vanish identically") {
    for (int q : {3, 4, 5}) {
        CHECK(q_analytic(q, 1, 1, {16, 16}).value == 0.0);
        CHECK(q_analytic(q, 4, 2, {16, 16}).value == 0.0);
        CHECK(q_analytic(q, 3, 3, {8, 8}).value == 0.0);
        CHECK(q2_closed(q, 9, {16, 16}).value == 0.0);
        CHECK(q2_closed(q, 21, {16, 16}).value == 0.0);
        CHECK(q_ergodic(q, 6, 2, 8).value == 0.0);
        for (std::uint64_t m : {1, 2, 5}) CHECK(std::fabs(q_ergodic(q, m, 1, 10, {.K = 20}).value) < 1e-9);
    }
}

TEST_CASE("rational-constraint enumeration matches a plain tuple loop") {
    for (int q : {3, 4, 5})
        for (long m : {1, 2, 5, 10}) {
            const double o2 = oracle_moment(q, m, 2, 8, 8);
            const double o3 = oracle_moment(q, m, 3, 6, 6);
            const double o4 = oracle_moment(q, m, 4, 4, 4);
            CHECK(q_analytic(q, m, 2, {8, 8}).value == doctest::Approx(o2).epsilon(1e-11));
            CHECK(q_analytic(q, m, 3, {6, 6}).value == doctest::Approx(o3).epsilon(1e-10).scale(1e-9));
            CHECK(q_analytic(q, m, 4, {4, 4}).value == doctest::Approx(o4).epsilon(1e-10).scale(1e-9));
        }
}

TEST_CASE("closed series equals the ℓ = 2 enumeration") {
    for (int q : {3, 4})
        for (std::uint64_t m : support_upto(30)) {
            auto c = q2_closed(q, m, {40, 40});
            auto a = q_analytic(q, m, 2, {40, 40});
            CHECK(c.value == doctest::Approx(a.value).epsilon(1e-12));
            CHECK(c.value > 0);
            CHECK(c.error_estimate > 0);
            CHECK(c.method == Method::Closed2);
        }
}

TEST_CASE("period averaging agrees with the closed series within errors") {
    for (int q : {3, 4})
        for (std::uint64_t m : support_upto(30)) {
            auto c = q2_closed(q, m, {40, 40});
            auto e = q_ergodic(q, m, 2, 12, {.K = 24});
            INFO("q=" << q << " m=" << m << " closed " << c.value << "±" << c.error_estimate << " ergodic "
                      << e.value << "±" << e.error_estimate);
            CHECK(std::fabs(c.value - e.value) <= c.error_estimate + e.error_estimate);
            // the quadrature itself is exact: the period average equals ½Σ|A_f|²
            auto e0 = q_ergodic(q, m, 2, 12, {.K = 24, .truncation_error = false});
            CHECK(e0.value == doctest::Approx(phi::PhiSeries(q, m, 12, 24).mean_square()).epsilon(1e-10));
        }
}

TEST_CASE("third moments: sign, bound and agreement between methods") {
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5, 10, 13}) {
            auto a = q_analytic(q, m, 3, {16, 16});
            const double bound = q3_upper_bound(q, m);
            CHECK(bound < 0);
            CHECK(a.value <= bound);
            CHECK(a.convergence_delta >= 0);
            // the period average truncates φ term by term rather than by reduced
            // frequency, so the two only meet within their truncation errors
            auto e = q_ergodic(q, m, 3, 8, {.K = 16});
            INFO("q=" << q << " m=" << m << " analytic " << a.value << " ergodic " << e.value);
            CHECK(std::fabs(e.value - a.value) <= e.error_estimate + a.error_estimate);
            CHECK(std::fabs(e.value - a.value) <= 0.1 * std::fabs(a.value));
        }
    CHECK(q3_upper_bound(3, 3) == 0.0);
}

TEST_CASE("variance series: partial sums and per-m values") {
    const auto& small = variance_series(3, 256, 20);
    // the d-tail of the oracle falls off like 1/D², so one Richardson step removes it
    auto richardson = [](int q, long N, long D) {
        const double lo = oracle_variance_partial(q, N, D), hi = oracle_variance_partial(q, N, 2 * D);
        return hi + (hi - lo) / 3;
    };
    CHECK(small.partial == doctest::Approx(richardson(3, 256, 4000)).epsilon(1e-9));
    const auto& small4 = variance_series(4, 128, 20);
    CHECK(small4.partial == doctest::Approx(oracle_variance_partial(4, 128, 2000)).epsilon(1e-9));

    for (int q : {3, 4}) {
        const auto& vs = variance_series(q);
        CHECK(vs.value > vs.partial);
        CHECK(vs.error > 0);
        CHECK(vs.error < 1e-2 * vs.value);
        CHECK(vs.checkpoints.size() == vs.partial_at.size());
        for (std::size_t i = 1; i < vs.partial_at.size(); ++i) CHECK(vs.partial_at[i] >= vs.partial_at[i - 1]);
        // the per-m column agrees with the closed series; the differences are the
        // k > √(N/m) and d > 40 terms
        for (std::uint64_t m : {1, 2, 5, 13}) {
            auto c = q2_closed(q, m, {40, 40});
            CHECK(vs.q2_by_m[m] == doctest::Approx(c.value).epsilon(5e-3));
        }
        CHECK(vs.q2_by_m[3] == 0.0);
    }
}

TEST_CASE("variance partial sums follow the predicted tail shape") {
    // (V − V_ℓ)·√ℓ/log(2ℓ) stays within a bounded band
    for (int q : {3, 4, 5}) {
        const auto& vs = variance_series(q);
        double lo = 1e300, hi = 0;
        for (std::uint64_t l = 4; l <= 512; l *= 2) {
            double head = 0;
            for (std::uint64_t m = 1; m <= l; ++m) head += vs.q2_by_m[m];
            const double r = (vs.value - head) * std::sqrt(double(l)) / std::log(2.0 * double(l));
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        INFO("q=" << q << " band [" << lo << ", " << hi << "]");
        CHECK(lo > 0);
        CHECK(hi / lo < 4);
    }
}

TEST_CASE("density moments by composition") {
    CHECK(density_moment(3, 1, 30).value == 0.0);
    auto p = density_moment(3, 2, 30);
    auto np = density_moment(3, 2, 30, {.prune = false});
    CHECK(p.value == np.value);
    double direct = 0;
    for (std::uint64_t m : support_upto(30)) direct += q2_closed(3, m, {40, 40}).value;
    CHECK(p.value == doctest::Approx(direct).epsilon(1e-12));
    CHECK(p.error_estimate > 0);
    auto m3 = density_moment(3, 3, 20);
    CHECK(m3.value < 0);
    CHECK_THROWS_AS(density_moment(3, 9, 10), BudgetError);
}

TEST_CASE("third-moment sum over m") {
    auto t = third_moment_sum(3, 20);
    CHECK(t.sum.value < 0);
    CHECK(t.all_nonpositive);
    CHECK(t.per_m.size() == 21);
    CHECK(t.per_m[3] == 0.0);
    CHECK(t.per_m[4] == 0.0);
    double s = 0;
    for (double v : t.per_m) s += v;
    CHECK(t.sum.value == doctest::Approx(s).epsilon(1e-12));
    CHECK(t.tail_magnitude_estimate > 0);
    CHECK(t.tail_magnitude_estimate < std::fabs(t.sum.value));
}

TEST_CASE("resource limits") {
    CHECK_THROWS_AS(q_analytic(3, 1, 4, {40, 40}, {.max_combinations = 1000}), BudgetError);
    CHECK_THROWS_AS(q_ergodic(3, 1, 2, 128), PeriodOverflow);
    CHECK_THROWS_AS(q_ergodic(3, 1, 2, 30, {.max_samples = 1000}), BudgetError);
    CHECK_THROWS_AS(q_analytic(2, 1, 2, {8, 8}), std::invalid_argument);
    CHECK_THROWS_AS(variance_series(3, 10), std::invalid_argument);
}
