// Number-theoretic primitives: Möbius, χ mod 4, sums of two squares with the
// (|a|/√m)^{q-1} weights, the r_{2q} prefix table used for lattice counting,
// and the coefficient symbols ξ, ε, 𝔯, ϱ_q, ϱ_{χ,q}.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hlat/core.hpp"

namespace hlat::arith {

int mobius(std::uint64_t n);
inline int chi4(std::uint64_t n) { return (n & 1) == 0 ? 0 : ((n & 3) == 1 ? 1 : -1); }
// χ extended to negative arguments (χ(−n) = −χ(n) for the odd character).
inline int chi4_signed(std::int64_t n) { return n < 0 ? -chi4(std::uint64_t(-n)) : chi4(std::uint64_t(n)); }

bool is_squarefree(std::uint64_t n);
// True when m is square-free and has no prime factor ≡ 3 (mod 4); these are the
// only m for which φ_{q,m} does not vanish identically.
bool phi_support(std::uint64_t m);

// r₂(n) = #{(a,b) ∈ Z² : a²+b² = n}, via 4·Σ_{d|n} χ(d).
std::uint64_t r2_count(std::uint64_t n);
std::uint64_t divisor_count(std::uint64_t n);

// Pairs (a,b) ∈ Z² with a²+b² = m, in the canonical order: |a| ascending,
// then signs (+a before −a), then b before −b.
struct Rep {
    std::int64_t a;
    std::int64_t b;
};
std::vector<Rep> representations(std::uint64_t m);

// The representations of one m with their (|a|/√m)^{q−1} weights precomputed,
// so that r₂(m,d;q) and r_{2,χ}(m,d;q) can be queried for many d cheaply.
class WeightedReps {
public:
    WeightedReps(std::uint64_t m, int q);
    double weighted(std::uint64_t d) const;
    double weighted_chi(std::uint64_t d) const;
    std::uint64_t m() const { return m_; }
    bool empty() const { return reps_.empty(); }
    const std::vector<Rep>& reps() const { return reps_; }
    const std::vector<double>& weights() const { return w_; }

private:
    std::uint64_t m_;
    std::vector<Rep> reps_;
    std::vector<double> w_;
};

// (a²/m)^{(q−1)/2} evaluated from the reduced fraction a²/m, so equal ratios
// give bit-identical weights.
double rep_weight(std::uint64_t a, std::uint64_t m, int q);

double r2_weighted(std::uint64_t m, std::uint64_t d, int q);
double r2_weighted_chi(std::uint64_t m, std::uint64_t d, int q);

struct ArithTables {
    int q = 0;
    std::uint64_t limit = 0;                 // N
    std::vector<std::uint64_t> r2q_prefix;   // Σ_{m≤T} r_{2q}(m), T = 0..N
    std::uint64_t small_limit = 0;           // reps stored for m ≤ small_limit
    std::vector<std::vector<Rep>> r2_reps;
    std::vector<std::int8_t> mobius;         // μ(m), m = 0..small_limit (μ(0) unused)

    std::uint64_t r2q(std::uint64_t m) const {
        return m == 0 ? r2q_prefix[0] : r2q_prefix[m] - r2q_prefix[m - 1];
    }
};

struct TableOptions {
    std::size_t memory_budget_bytes = std::size_t(3) << 30;
    std::uint64_t small_limit = 1000;
    std::optional<std::filesystem::path> cache_dir;
};

ArithTables build_r2q_prefix(int q, std::uint64_t N, const TableOptions& opt = {});

// Binary cache: "HLATR2Q\0", u32 q, u32 0, u64 N, then N+1 u64 entries, all
// little-endian.
void save_prefix_cache(const std::filesystem::path& file, int q, const std::vector<std::uint64_t>& prefix);
std::optional<std::vector<std::uint64_t>> load_prefix_cache(const std::filesystem::path& file, int q,
                                                            std::uint64_t N);
std::filesystem::path prefix_cache_name(const std::filesystem::path& dir, int q, std::uint64_t N);

// r_{2q}(m) by brute force over Z^{2q}; only for tiny m.
std::uint64_t r2q_bruteforce(int q, std::uint64_t m);

// ζ(s) and L(s,χ) for real s > 1.
double zeta(double s);
double l_chi(double s);
inline double zeta_partial(int s) { return zeta(double(s)); }
inline double l_chi_partial(int s) { return l_chi(double(s)); }

// ---- coefficient symbols -------------------------------------------------

double rho_q(int q);
double rho_chi(int q);
// ξ(d;q), only meaningful for even q.
double xi(std::uint64_t d, int q);
inline int epsilon(std::uint64_t d, int q) { return (q % 2 == 1 && d % 2 == 0) ? -1 : 1; }
// 𝔯(mk²,d;q).
double frak_r(std::uint64_t m, std::uint64_t k, std::uint64_t d, int q);
// Same, reusing precomputed representations of n = mk².
double frak_r(const WeightedReps& reps_mk2, std::uint64_t k, std::uint64_t d, int q);

// Dirichlet series of g(k) = r₂(k²)/4 = Π_{p^e‖k, p≡1 (4)} (2e+1):
//   Σ g(k)k^{−s}  = ζ(s)²L(s,χ)/((1+2^{−s})ζ(2s))          (s > 1)
//   Σ g(k)²k^{−s} via its Euler product; an upper bound accurate to ~1e−12 (s ≥ 2)
double square_r2_series(double s);
double square_r2_sq_series(double s);
// g(k) for a single k.
std::uint64_t square_r2_factor(std::uint64_t k);

// Smallest-prime-factor table for n ≤ N (cached; grows on demand).
const std::vector<std::uint32_t>& spf_table(std::uint32_t N);
std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n);
std::vector<std::uint64_t> divisors(std::uint64_t n);

// Smallest C with d(n) ≤ C·n^e for all n ≥ 1 (exact product over small primes).
double divisor_bound_constant(double e);

}  // namespace hlat::arith
