// The almost-periodic components φ_{q,m}(t) of the normalized error, truncated
// to moduli d ≤ D and frequency indices k ≤ K, with majorant tail bounds.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "hlat/arithmetic.hpp"

namespace hlat::phi {

struct PhiTruncation {
    std::uint64_t D = 128;
    std::uint64_t K = 128;
    double tail_bound = 0;  // sup-norm bound on φ − φ_{D,K}; filled by truncation_for()
};

PhiTruncation truncation_for(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K);

// One term amp·sin(2π(k/d)t − π/4) (or cos).
struct PhiTerm {
    std::uint32_t d;
    std::uint32_t k;
    double amp;
    bool is_cos;
};

class PhiSeries {
public:
    PhiSeries(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K);

    double operator()(double t) const;
    int q() const { return q_; }
    std::uint64_t m() const { return m_; }
    std::uint64_t D() const { return D_; }
    std::uint64_t K() const { return K_; }
    bool vanishes() const { return terms_.empty(); }
    const std::vector<PhiTerm>& terms() const { return terms_; }
    // Σ|amp|: a bound for sup_t |φ_{D,K}(t)|.
    double amplitude_sum() const;
    // ½ Σ_f |A_f|² over distinct reduced frequencies f = k/d: the exact mean of φ_{D,K}².
    double mean_square() const;
    // lcm(1..D); throws PeriodOverflow if it does not fit in 62 bits.
    std::uint64_t period() const;

private:
    int q_;
    std::uint64_t m_, D_, K_;
    std::vector<PhiTerm> terms_;
};

double phi(int q, std::uint64_t m, double t, const PhiTruncation& trunc);
double phi_truncated(int q, std::uint64_t m, double t, std::uint64_t n, std::uint64_t K);

// Prefactor in front of the double series: (ϱ_q/2π)·m^{−3/4} (q even) or
// (2^{q−2}ϱ_{χ,q}/π)·m^{−3/4} (q odd); zero when φ_{q,m} ≡ 0.
double series_prefactor(int q, std::uint64_t m);

// Rigorous sup-norm bound on the terms with d > D or k > K.
double tail_bound_for(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K);

// Weights c(d) indexed by d mod 4, for the two majorants below. Neither
// includes a prefactor; D = 0 or K = 0 means nothing is kept.
using ClassWeights = std::array<double, 4>;
// ≥ Σ over (d,k) outside [1,D]×[1,K] of c(d)·r₂(mk²,d;q)/(d^{q−3/2}k^{3/2}).
double dropped_abs_majorant(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K, const ClassWeights& c);
// ≥ Σ over coprime (d,k) outside [1,D]×[1,K] of (c(d)·r₂(mk²,d;q))²/(d^{2q−3}k³).
double dropped_sq_majorant(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K, const ClassWeights& c);

// L² bounds on the dropped part δ = φ − φ_{D,K}, split into the component on
// frequencies already present in φ_{D,K} ("in") and the rest ("out", given as
// its square since it adds to mean φ² directly):
//   0 ≤ mean φ² − mean(φ_{D,K} + δ_in)² ≤ out_sq,
//   |mean φ² − mean φ_{D,K}²| ≤ in² + out_sq + 2‖φ_{D,K}‖₂·in.
struct L2Tail {
    double in = 0;
    double out_sq = 0;
    double norm() const { return std::sqrt(in * in + out_sq); }  // bound on ‖δ‖₂
    double mean_square_error(double phi_norm) const { return in * in + out_sq + 2 * phi_norm * in; }
};
L2Tail l2_tail_bound(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K);

// Σ_{m≤M} φ_{q,m}(√m·x²) for each x.
std::vector<double> partial_sum_phi(int q, std::uint64_t M, const std::vector<double>& x_list,
                                    const PhiTruncation& trunc);

std::uint64_t lcm_upto(std::uint64_t D);

// φ_{D,K} on the grid t_j = j/s over one full period, j < period·s. Every term
// depends on t only through t mod d, so φ(t_j) = Σ_d G_d[j mod d·s] with one
// table per modulus and exact integer phases.
class GridSampler {
public:
    GridSampler(const PhiSeries& series, std::uint64_t s);
    std::uint64_t per_unit() const { return s_; }
    std::uint64_t size() const { return size_; }
    // out[i] = φ(t_{j0 + i·stride}), i < count
    void sample(std::uint64_t j0, std::uint64_t stride, std::size_t count, double* out) const;

private:
    std::uint64_t s_, size_;
    std::vector<std::uint64_t> len_;
    std::vector<std::vector<double>> tab_;
};

// max |φ_{D,K}(t)|·m^{3/4}/r₂(m) over the given t: the measured constant in the
// uniform bound |φ_{q,m}| ≤ a·μ²(m)r₂(m)/m^{3/4}.
double uniform_bound_ratio(const PhiSeries& series, const std::vector<double>& t_list);

}  // namespace hlat::phi
