// Exact lattice-point counts in dilated Cygan–Korányi balls and the
// normalized error term (count − vol·x^{2q+2}) / x^{2q−1}.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hlat/arithmetic.hpp"
#include "hlat/core.hpp"

namespace hlat::lattice {

struct GroupParams {
    int q;
    int dimension;      // 2q+1
    bool even;
    long double volume;  // vol(B)
    double rho;          // ϱ_q (q even) — always filled
    double rho_chi;      // ϱ_{χ,q}

    explicit GroupParams(int q);
};

// The squared radius x² = num/den held exactly (den > 0, reduced).
struct RadiusSq {
    std::uint64_t num = 0;
    std::uint64_t den = 1;

    static RadiusSq from_x2(std::uint64_t n, std::uint64_t d = 1);
    // x = p/r
    static RadiusSq from_x(std::uint64_t p, std::uint64_t r = 1);
    // Parses "p/r", "7", "1.25" as x; "sqrt(n)" as x = √n.
    static RadiusSq parse_x(const std::string& s);
    // Parses an x² value: "n", "n/d" or a decimal.
    static RadiusSq parse_x2(const std::string& s);

    long double x2() const { return (long double)num / (long double)den; }
    long double x() const { return std::sqrt(x2()); }
    std::uint64_t floor_x2() const { return num / den; }
    std::string str() const;
};

struct ErrorSample {
    long double x;
    u128 count;
    long double normalized_error;
};

long double volume_unit_ball(int q);

u128 count_points(const arith::ArithTables& tables, const RadiusSq& r);
u128 count_points_bruteforce(int q, const RadiusSq& r, double budget = 2e9);

ErrorSample normalized_error(const GroupParams& params, const arith::ArithTables& tables, const RadiusSq& r);
long double normalized_error_value(const GroupParams& params, u128 count, const RadiusSq& r);

// n equispaced x in [X,2X): x_i = X(n+i)/n, held exactly.
std::vector<RadiusSq> sample_grid(std::uint64_t X_num, std::uint64_t X_den, std::uint64_t n);

// Table size needed to count on [X,2X].
std::uint64_t table_limit_for(std::uint64_t X_num, std::uint64_t X_den);

}  // namespace hlat::lattice
