// Finite Voronoï-type approximation of the normalized error: the coefficient
// functions 𝔞_H, 𝔞*_H, 𝔞_{H,χ}, 𝔟*_H, the trigonometric sums S_{q,H}, S*_{q,H}
// and (q = 3) the T-sums, and the mean-square gap against exact counts.
#pragma once

#include <cstdint>
#include <vector>

#include "hlat/arithmetic.hpp"
#include "hlat/lattice.hpp"

namespace hlat::voronoi {

double tau(double t);
double tau_star(double t);

struct Coefficients {
    double a = 0;       // 𝔞_H(m,d;q)
    double a_star = 0;  // 𝔞*_H(m,d;q)
    double a_chi = 0;   // 𝔞_{H,χ}(m,d;q)
    double b_star = 0;  // 𝔟*_H(m,d;q)
};

Coefficients coefficients(std::uint64_t m, std::uint64_t d, int q, double H);
inline double coeff_aH(std::uint64_t m, std::uint64_t d, int q, double H) { return coefficients(m, d, q, H).a; }
inline double coeff_aH_star(std::uint64_t m, std::uint64_t d, int q, double H) { return coefficients(m, d, q, H).a_star; }
inline double coeff_aH_chi(std::uint64_t m, std::uint64_t d, int q, double H) { return coefficients(m, d, q, H).a_chi; }
inline double coeff_bH_star(std::uint64_t m, std::uint64_t d, int q, double H) { return coefficients(m, d, q, H).b_star; }

enum class Part : unsigned {
    S = 1,         // S_{q,H}
    SStar = 2,     // S*_{q,H}
    TChi = 4,      // T^H_{q,χ}           (q = 3)
    TChiTwist = 8, // T^{H,χ}_q           (q = 3)
    TStar = 16,    // T^H_q               (q = 3)
};
constexpr unsigned operator|(Part a, Part b) { return unsigned(a) | unsigned(b); }
constexpr unsigned operator|(unsigned a, Part b) { return a | unsigned(b); }

// The approximant used against E/x^{2q−1}: S_{q,H}, plus both χ T-sums when q = 3.
unsigned approximant_parts(int q);

// Every term of the selected sums is amp·sin(2π f x² − π/4) or amp·cos(…).
struct Term {
    double freq;
    double amp;
    bool is_cos;
};

// Enumerates the terms in the fixed order (d ascending, then h, then n).
void for_each_term(const lattice::GroupParams& params, double H, unsigned parts,
                   const std::function<void(const Term&)>& fn);
std::size_t term_count(const lattice::GroupParams& params, double H, unsigned parts);

// Direct evaluation at one x² (compensated summation, phases reduced mod 1).
double evaluate(const lattice::GroupParams& params, double H, unsigned parts, double x2);
inline double eval_S_qH(const lattice::GroupParams& p, double x2, double H) { return evaluate(p, H, unsigned(Part::S), x2); }
inline double eval_S_star_qH(const lattice::GroupParams& p, double x2, double H) { return evaluate(p, H, unsigned(Part::SStar), x2); }
double eval_T_sums(const lattice::GroupParams& p, double x2, double H);

// Evaluation on the grid x_i = X(1 + i/n), i < n, using a chirp recurrence for
// the phases; agrees with evaluate() to ~1e-12 relative.
std::vector<double> evaluate_on_grid(const lattice::GroupParams& params, double H, unsigned parts, double X,
                                     std::size_t n);

struct GapResult {
    double X = 0;
    double H = 0;
    std::size_t samples = 0;
    double mean_square_gap = 0;
    double empirical_second_moment = 0;
    double approximant_second_moment = 0;
    std::size_t terms = 0;
};

// H ≤ 0 selects the default H = X²/2.
GapResult mean_square_gap(const lattice::GroupParams& params, const arith::ArithTables& tables,
                          std::uint64_t X, std::size_t samples, double H = 0);

}  // namespace hlat::voronoi
