#include "hlat/lattice.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace hlat::lattice {

long double volume_unit_ball(int q) {
    if (q < 1) throw std::invalid_argument("q must be positive");
    // π^q/Γ(q+1) · B(1/2, q/2+1), all Gammas at integer or half-integer points
    long double lq = q;
    long double beta = std::exp(std::lgamma(0.5L) + std::lgamma(lq / 2 + 1) - std::lgamma(lq / 2 + 1.5L));
    return std::pow(std::numbers::pi_v<long double>, lq) / std::tgamma(lq + 1) * beta;
}

GroupParams::GroupParams(int q_)
    : q(q_), dimension(2 * q_ + 1), even(q_ % 2 == 0), volume(0), rho(0), rho_chi(0) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    volume = volume_unit_ball(q);
    rho = arith::rho_q(q);
    rho_chi = arith::rho_chi(q);
}

RadiusSq RadiusSq::from_x2(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw std::invalid_argument("zero denominator");
    std::uint64_t g = gcd_u64(n, d);
    if (g == 0) g = 1;
    return {n / g, d / g};
}

RadiusSq RadiusSq::from_x(std::uint64_t p, std::uint64_t r) {
    if (r == 0) throw std::invalid_argument("zero denominator");
    std::uint64_t g = gcd_u64(p, r);
    if (g == 0) g = 1;
    p /= g;
    r /= g;
    if (p > 0xFFFFFFFFull || r > 0xFFFFFFFFull) throw std::invalid_argument("radius numerator/denominator too large");
    return {p * p, r * r};
}

namespace {

std::uint64_t parse_uint(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty number");
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("not a non-negative integer: " + s);
        if (v > (UINT64_MAX - 9) / 10) throw std::invalid_argument("number too large: " + s);
        v = v * 10 + std::uint64_t(c - '0');
    }
    return v;
}

// "p/r", "n" or a plain decimal "a.b" -> reduced fraction
std::pair<std::uint64_t, std::uint64_t> parse_fraction(const std::string& s) {
    if (auto slash = s.find('/'); slash != std::string::npos) {
        auto n = parse_uint(s.substr(0, slash)), d = parse_uint(s.substr(slash + 1));
        if (d == 0) throw std::invalid_argument("zero denominator in " + s);
        return {n, d};
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
        std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
        if (ip.empty()) ip = "0";
        if (fp.size() > 9) throw std::invalid_argument("too many decimals in " + s);
        std::uint64_t den = 1;
        for (std::size_t i = 0; i < fp.size(); ++i) den *= 10;
        return {parse_uint(ip) * den + (fp.empty() ? 0 : parse_uint(fp)), den};
    }
    return {parse_uint(s), 1};
}

}  // namespace

RadiusSq RadiusSq::parse_x(const std::string& s) {
    if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') {
        auto [n, d] = parse_fraction(s.substr(5, s.size() - 6));
        return from_x2(n, d);
    }
    auto [p, r] = parse_fraction(s);
    return from_x(p, r);
}

RadiusSq RadiusSq::parse_x2(const std::string& s) {
    auto [n, d] = parse_fraction(s);
    return from_x2(n, d);
}

std::string RadiusSq::str() const {
    std::ostringstream os;
    os << num;
    if (den != 1) os << '/' << den;
    return os.str();
}

u128 count_points(const arith::ArithTables& tables, const RadiusSq& r) {
    // |z|⁴ + w² ≤ x⁴ with x² = a/b  ⇔  |z|² ≤ ⌊√(a² − w²b²)⌋ / b  (integer division)
    const std::uint64_t a = r.num, b = r.den;
    const std::uint64_t W = a / b;
    if (W > tables.limit)
        throw TableTooSmall("table limit " + std::to_string(tables.limit) + " below floor(x^2) = " +
                            std::to_string(W));
    const auto& R = tables.r2q_prefix;
    u128 total = 0;
    const u128 a2 = u128(a) * a;
    if (a2 <= u128(UINT64_MAX) && u128(b) * b * (u128(W) * W + 1) <= u128(UINT64_MAX)) {
        const std::uint64_t A2 = std::uint64_t(a2), B2 = b * b;
        if (b == 1) {
            for (std::uint64_t w = 1; w <= W; ++w) total += R[isqrt(A2 - w * w)];
        } else {
            for (std::uint64_t w = 1; w <= W; ++w) total += R[isqrt(A2 - w * w * B2) / b];
        }
        total *= 2;
        total += R[isqrt(A2) / b];
    } else {
        const u128 B2 = u128(b) * b;
        for (std::uint64_t w = 1; w <= W; ++w) total += R[std::uint64_t(isqrt(a2 - u128(w) * w * B2) / b)];
        total *= 2;
        total += R[std::uint64_t(isqrt(a2) / b)];
    }
    return total;
}

namespace {

// Counts z ∈ Z^{coords} with |z|² = s for every s ≤ cap, accumulated into hist.
void norm_histogram(int coords, std::uint64_t partial, std::uint64_t cap, std::int64_t box,
                    std::vector<std::uint64_t>& hist) {
    if (coords == 0) {
        ++hist[partial];
        return;
    }
    for (std::int64_t v = -box; v <= box; ++v) {
        std::uint64_t s = partial + std::uint64_t(v * v);
        if (s > cap) continue;
        norm_histogram(coords - 1, s, cap, box, hist);
    }
}

}  // namespace

u128 count_points_bruteforce(int q, const RadiusSq& r, double budget) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    const std::uint64_t a = r.num, b = r.den;
    const std::uint64_t W = a / b;          // |w| ≤ x²
    const std::uint64_t zcap = W;           // |z|² ≤ x² as well
    const auto box = std::int64_t(isqrt(zcap));
    double work = std::pow(2.0 * double(box) + 1, 2 * q) + double(2 * W + 1) * double(zcap + 1);
    if (work > budget) throw BudgetError("brute-force enumeration box too large");
    // enumerate z over the box, bucket by |z|², then test every w exactly
    std::vector<std::uint64_t> hist(zcap + 1, 0);
    norm_histogram(2 * q, 0, zcap, box, hist);
    const u128 a2 = u128(a) * a, b2 = u128(b) * b;
    u128 total = 0;
    for (std::uint64_t s = 0; s <= zcap; ++s) {
        if (!hist[s]) continue;
        for (std::int64_t w = -std::int64_t(W); w <= std::int64_t(W); ++w) {
            u128 lhs = (u128(s) * s + u128(w * w)) * b2;
            if (lhs <= a2) total += hist[s];
        }
    }
    return total;
}

long double normalized_error_value(const GroupParams& params, u128 count, const RadiusSq& r) {
    long double x2 = r.x2();
    long double x = std::sqrt(x2);
    long double main = params.volume * std::pow(x2, (long double)(params.q + 1));
    return ((long double)count - main) / std::pow(x, (long double)(2 * params.q - 1));
}

ErrorSample normalized_error(const GroupParams& params, const arith::ArithTables& tables, const RadiusSq& r) {
    if (tables.q != params.q) throw std::invalid_argument("table built for a different q");
    u128 c = count_points(tables, r);
    return {r.x(), c, normalized_error_value(params, c, r)};
}

std::vector<RadiusSq> sample_grid(std::uint64_t X_num, std::uint64_t X_den, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("sample count must be positive");
    std::vector<RadiusSq> out;
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        // x = X_num(n+i) / (X_den n)
        std::uint64_t p = X_num * (n + i), d = X_den * n;
        out.push_back(RadiusSq::from_x(p, d));
    }
    return out;
}

std::uint64_t table_limit_for(std::uint64_t X_num, std::uint64_t X_den) {
    long double x = 2.0L * X_num / X_den;
    return std::uint64_t(std::floor(x * x)) + 1;
}

}  // namespace hlat::lattice
