// The moment ladder Q_q(m,ℓ) = lim mean of φ_{q,m}^ℓ, computed three ways
// (rational-constraint enumeration, the closed ℓ = 2 double series, and
// exact-period averaging of φ), plus the variance series summed over all m,
// the moments of the limiting density by composition, and the third-moment sum.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlat/phi.hpp"

namespace hlat::moments {

enum class Method { Analytic, Closed2, Ergodic, Empirical };
std::string method_name(Method m);

struct Depth {
    std::uint64_t D = 40;
    std::uint64_t K = 40;
};

struct MomentValue {
    double value = 0;
    Method method = Method::Analytic;
    std::uint64_t D = 0, K = 0;
    int depth = 0;              // ℓ: number of atoms tied by the rational constraint
    double error_estimate = 0;  // ≥ 0
    // Analytic ℓ ≥ 3: the dropped-tuple majorant is rigorous but ignores the
    // constraint and is usually far larger than the value; the change against
    // half depth is reported alongside as a practical accuracy gauge.
    double convergence_delta = 0;
    std::uint64_t work = 0;  // tuples combined or quadrature samples used
};

struct AnalyticOptions {
    // Cap on rational-key combinations formed while convolving; BudgetError beyond.
    std::uint64_t max_combinations = 400'000'000;
    bool with_convergence_delta = true;
};

// Σ over sign vectors and (d_i,k_i) in the box with Σ e_i ε(d_i)k_i/d_i = 0
// (exact rational arithmetic) of cos(π/4·Σe_i)·Π 𝔯(mk_i²,d_i)/(d_i^{q−3/2}k_i^{3/2}),
// times (−1)^ℓ(π^{q−1}/4Γ(q))^ℓ μ²(m)/m^{3ℓ/4}. ℓ = 1 gives exactly 0.
MomentValue q_analytic(int q, std::uint64_t m, int l, const Depth& depth, const AnalyticOptions& opt = {});

// The closed ℓ = 2 double series, summed over d ≤ D, k ≤ K with the coprimality
// conditions (d, mk²) = 1; error_estimate bounds the remaining terms.
MomentValue q2_closed(int q, std::uint64_t m, const Depth& depth);

struct ErgodicOptions {
    std::uint64_t K = 0;                // 0: same as D
    std::uint64_t samples_per_unit = 0;  // 0: ℓK + 1 (exact for the trigonometric polynomial φ_{D,K}^ℓ)
    std::uint64_t max_samples = 400'000'000;
    double tolerance = 1e-9;
    bool truncation_error = true;  // false: error_estimate is the quadrature change only
};

// Mean of φ_{D,K}^ℓ over one period lcm(1..D) by the trapezoid rule, doubling
// the grid until two estimates agree to the tolerance. error_estimate is that
// difference plus the effect of the dropped terms of φ.
MomentValue q_ergodic(int q, std::uint64_t m, int l, std::uint64_t D, const ErgodicOptions& opt = {});

// Σ_m Q_q(m,2) from the series over n = mk² (every n summed once), with the
// tail beyond N extrapolated from S(N) ≈ S∞ − (A log N + B)/√N.
struct VarianceSeries {
    int q = 0;
    std::uint64_t N = 0;
    double partial = 0;    // Σ over n ≤ N
    double value = 0;      // extrapolated total
    double error = 0;      // disagreement of two extrapolations, doubled
    std::vector<std::uint64_t> checkpoints;
    std::vector<double> partial_at;
    // Q(m,2) for m ≤ q2_by_m.size() − 1 from the same series (terms mk² ≤ N).
    std::vector<double> q2_by_m;
};
const VarianceSeries& variance_series(int q, std::uint64_t N = 1u << 22, std::uint64_t m_report = 1000);
inline double variance_total(int q) { return variance_series(q).value; }

// j-th moment of the limiting density: Σ over compositions of j into ℓ_i over
// strictly increasing m_i ≤ M_max of j!/Πℓ_i!·Π Q(m_i,ℓ_i). With prune set,
// parts ℓ_i = 1 are skipped; without it they are included with their (zero) values.
struct DensityMomentOptions {
    bool prune = true;
    Depth depth2{40, 40};  // for ℓ = 2 (closed series)
    Depth depth{16, 16};   // for ℓ ≥ 3 (analytic enumeration)
    int max_j = 8;
};
MomentValue density_moment(int q, int j, std::uint64_t M_max, const DensityMomentOptions& opt = {});

struct ThirdMomentSum {
    MomentValue sum;                 // Σ_{m≤M_max} Q(m,3)
    std::vector<double> per_m;       // Q(m,3), index m (0 unused)
    bool all_nonpositive = true;     // sign structure of the individual terms
    double tail_min_magnitude = 0;   // Σ_{M_max<m≤m_hi} of the per-m lower bounds on |Q(m,3)|
    double tail_magnitude_estimate = 0;  // estimate of |Σ_{m>M_max} Q(m,3)|
};
ThirdMomentSum third_moment_sum(int q, std::uint64_t M_max, const Depth& depth = {16, 16});

// The majorant shape for ℓ = 3: Q(m,3) ≤ −(π^{q−1}/2^{q+1}Γ(q))³ μ²(m) Σ_k r₂³(mk²)/(mk²)^{9/4};
// returns that (non-positive) right-hand side with k ≤ K_max.
double q3_upper_bound(int q, std::uint64_t m, std::uint64_t K_max = 4096);

}  // namespace hlat::moments
