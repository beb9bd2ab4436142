// Finite-X experiments: normalized errors sampled on [X,2X], their moments,
// Kolmogorov–Smirnov distance to the limiting density, the L² gap to the
// partial sums of φ, and a deterministic histogram.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlat/distribution.hpp"
#include "hlat/lattice.hpp"
#include "hlat/phi.hpp"

namespace hlat::empirical {

struct SampleSeries {
    int q = 0;
    std::uint64_t X_num = 0, X_den = 1;  // X = X_num/X_den
    std::uint64_t n = 0;
    std::vector<double> x;       // x_i = X(n+i)/n
    std::vector<double> errors;  // E(x_i)/x_i^{2q−1}
    double mean = 0, m2 = 0, m3 = 0, min = 0, max = 0;

    double X() const { return double(X_num) / double(X_den); }
};

// Requires tables covering ⌊(2X)²⌋ (TableTooSmall otherwise).
SampleSeries sample_errors(const lattice::GroupParams& params, const arith::ArithTables& tables, std::uint64_t X,
                           std::uint64_t n, std::uint64_t X_den = 1);
// Recomputes the summary statistics from the array (fixed-order pairwise sums).
void recompute_stats(SampleSeries& s);

// Grid average of |e|^λ, λ ∈ (0,2]; with signed_first and λ = 1, the plain average of e.
double empirical_lambda_moment(const SampleSeries& s, double lambda, bool signed_first = false);

// sup over the samples of |empirical CDF − CDF|, both sides of every jump.
double ks_distance(const SampleSeries& s, const distribution::DensityGrid& grid,
                   const distribution::DensityMoments& mom);
// Same against the centred Gaussian of the given variance.
double ks_distance_gaussian(const SampleSeries& s, double variance);

// Grid average of |e(x) − Σ_{m≤M} φ_{q,m}(√m·x²)|²; M = 0 gives the second moment.
double theorem4_l2_gap(const SampleSeries& s, std::uint64_t M, const phi::PhiTruncation& trunc);
double theorem4_l2_gap(const lattice::GroupParams& params, const arith::ArithTables& tables, std::uint64_t X,
                       std::uint64_t n, std::uint64_t M, const phi::PhiTruncation& trunc);

struct Histogram {
    std::string rule;  // "freedman-diaconis" or "fixed"
    double lo = 0, width = 0;
    std::vector<std::uint64_t> counts;
};
// bins = 0 picks the Freedman–Diaconis width 2·IQR·n^{−1/3}.
Histogram histogram(const SampleSeries& s, std::size_t bins = 0);

}  // namespace hlat::empirical
