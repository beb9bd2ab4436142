// The limiting distribution of the normalized error: the factors ℒ(α,m) as
// exact-period averages of exp(2πiαφ_{q,m}), their product Φ_q, the density
// P_q by trapezoid Fourier inversion, and its CDF and moments.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "hlat/phi.hpp"

namespace hlat::distribution {

using cplx = std::complex<double>;

struct CharOptions {
    std::uint64_t D = 6;
    std::uint64_t K = 16;
    double tolerance = 1e-10;  // grid refinement stops once successive averages agree to this
    std::uint64_t max_samples = 400'000'000;
};

// ℒ(α,m) ≈ average of exp(2πiα·φ_{D,K}(t)) over one period; exactly 1 when φ_{q,m} ≡ 0.
cplx char_factor(int q, cplx alpha, std::uint64_t m, const CharOptions& opt = {});

// ℒ(j·h, m) for j = 0..J in one pass (h may be negative).
struct FactorGrid {
    std::vector<cplx> values;
    double quad_delta = 0;  // last refinement change, max over j
    std::uint64_t samples = 0;
    double mean_square = 0;  // exact mean of φ_{D,K}²
};
FactorGrid char_factor_grid(int q, std::uint64_t m, double h, std::size_t J, const CharOptions& opt = {});

// Φ on σ_j = j·h, j = 0..J: Π_{m≤M} ℒ(σ_j,m), optionally times exp(−2π²σ²·V_rest)
// where V_rest is the variance Σ_m Q(m,2) not carried by the truncated factors
// (the remaining components are many, small and independent).
struct CharFunction {
    double h = 0;
    std::vector<cplx> values;
    std::uint64_t M = 0;
    double quad_error = 0;          // Σ_m of the per-factor refinement changes
    double captured_variance = 0;   // Σ_{m≤M} mean φ_{m,D,K}²
    double variance_total = 0;      // Σ_m Q(m,2)
    double completion_variance = 0; // the part supplied by the Gaussian factor
    // σ²·Σ_{m>M} r₂²(m)/m^{3/2}: the shape of the bound on |log Π_{m>M} ℒ(σ,m)|
    double tail_shape_coefficient = 0;
};
CharFunction char_function(int q, std::uint64_t M, double h, std::size_t J, const CharOptions& opt = {},
                           bool gaussian_completion = true);
// Single point, same conventions.
cplx char_function_at(int q, double sigma, std::uint64_t M, const CharOptions& opt = {}, bool gaussian_completion = true);

struct DensityOptions {
    std::uint64_t M = 60;
    double A = 0;           // σ cutoff; 0 picks the smallest multiple of h with |Φ| < 1e-12 beyond
    double sigma_step = 0;  // 0: 1/(2·(x_max − x_min))
    double x_min = 0, x_max = 0;  // 0, 0: ±12 standard deviations
    double x_step = 0.25;
    CharOptions trunc{};
    bool gaussian_completion = true;
};

struct DensityGrid {
    double x_min = 0, x_max = 0, step = 0;
    std::vector<double> x, P;
    double sigma_step = 0, A = 0;
    std::vector<cplx> Phi;  // at σ_j = j·sigma_step, j = 0..A/sigma_step
    std::uint64_t M = 0;
    CharOptions trunc{};
    double cutoff_remainder = 0;  // bound on ∫_{|σ|>A}|Φ|
    double quad_error = 0;        // propagated factor-quadrature error, per unit of P
    double total_error = 0;       // pointwise bound on the numerical error of P
    double captured_variance = 0, completion_variance = 0, variance_total = 0;
};
DensityGrid density(int q, const DensityOptions& opt = {});

struct DensityMoments {
    std::vector<double> cdf;      // cumulative trapezoid, clipped to be non-decreasing
    std::vector<double> raw;      // ∫x^j P dx, j = 0..j_max
    double abs1 = 0, abs2 = 0;    // ∫|x|P, ∫|x|²P
    double min_P = 0;
};
DensityMoments cdf_and_moments(const DensityGrid& grid, int j_max = 4);

// Error budgets for ∫P, ∫xP, ∫x²P, ∫x³P: numerical error of the grid plus the
// truncation sensitivity of the model (variance-series error for j = 2; for
// j = 3 the change of Σ_m mean φ_{m,D,K}³ against half depth and the m-tail).
struct MomentBudget {
    double value[4] = {0, 0, 0, 0};
    double budget[4] = {0, 0, 0, 0};
    double model_m3 = 0, model_m3_half = 0, m3_tail = 0;
};
MomentBudget moment_budget(int q, const DensityGrid& grid, const DensityMoments& mom);

}  // namespace hlat::distribution
