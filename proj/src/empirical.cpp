#include "hlat/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace hlat::empirical {

SampleSeries sample_errors(const lattice::GroupParams& params, const arith::ArithTables& tables, std::uint64_t X,
                           std::uint64_t n, std::uint64_t X_den) {
    if (X == 0 || n == 0 || X_den == 0) throw std::invalid_argument("X, n must be positive");
    const std::uint64_t need = lattice::table_limit_for(X, X_den);
    if (tables.limit < need)
        throw TableTooSmall("tables cover " + std::to_string(tables.limit) + ", sampling needs " + std::to_string(need));
    SampleSeries s;
    s.q = params.q;
    s.X_num = X;
    s.X_den = X_den;
    s.n = n;
    auto grid = lattice::sample_grid(X, X_den, n);
    s.x.resize(n);
    s.errors.resize(n);
    parallel_for(n, [&](std::size_t i) {
        auto e = lattice::normalized_error(params, tables, grid[i]);
        s.x[i] = double(e.x);
        s.errors[i] = double(e.normalized_error);
    });
    recompute_stats(s);
    return s;
}

void recompute_stats(SampleSeries& s) {
    const std::size_t n = s.errors.size();
    if (n == 0) throw std::invalid_argument("empty sample series");
    std::vector<double> p1(s.errors), p2(n), p3(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = s.errors[i];
        p2[i] = e * e;
        p3[i] = e * e * e;
    }
    s.mean = pairwise_sum(p1) / double(n);
    s.m2 = pairwise_sum(p2) / double(n);
    s.m3 = pairwise_sum(p3) / double(n);
    auto [lo, hi] = std::minmax_element(s.errors.begin(), s.errors.end());
    s.min = *lo;
    s.max = *hi;
}

double empirical_lambda_moment(const SampleSeries& s, double lambda, bool signed_first) {
    if (!(lambda > 0.0 && lambda <= 2.0)) throw std::domain_error("lambda must lie in (0, 2]");
    if (s.errors.empty()) throw std::invalid_argument("empty sample series");
    std::vector<double> v(s.errors.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double e = s.errors[i];
        if (signed_first && lambda == 1.0)
            v[i] = e;
        else if (lambda == 2.0)
            v[i] = e * e;
        else
            v[i] = std::pow(std::fabs(e), lambda);
    }
    return pairwise_sum(v) / double(v.size());
}

namespace {

double ks_against(const SampleSeries& s, const std::function<double(double)>& cdf) {
    std::vector<double> e(s.errors);
    std::sort(e.begin(), e.end());
    const double n = double(e.size());
    double d = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double F = cdf(e[i]);
        d = std::max(d, std::fabs(double(i + 1) / n - F));
        d = std::max(d, std::fabs(F - double(i) / n));
    }
    return std::min(d, 1.0);
}

}  // namespace

double ks_distance(const SampleSeries& s, const distribution::DensityGrid& grid,
                   const distribution::DensityMoments& mom) {
    if (mom.cdf.size() != grid.x.size() || grid.x.empty()) throw std::invalid_argument("density CDF not available");
    const double total = mom.cdf.back();
    return ks_against(s, [&](double v) {
        if (v <= grid.x.front()) return 0.0;
        if (v >= grid.x.back()) return 1.0;
        const double pos = (v - grid.x_min) / grid.step;
        std::size_t i = std::min(std::size_t(pos), grid.x.size() - 2);
        const double t = pos - double(i);
        return ((1 - t) * mom.cdf[i] + t * mom.cdf[i + 1]) / total;
    });
}

double ks_distance_gaussian(const SampleSeries& s, double variance) {
    if (!(variance > 0)) throw std::invalid_argument("variance must be positive");
    const double scale = 1.0 / std::sqrt(2.0 * variance);
    return ks_against(s, [&](double v) { return 0.5 * std::erfc(-v * scale); });
}

double theorem4_l2_gap(const SampleSeries& s, std::uint64_t M, const phi::PhiTruncation& trunc) {
    const std::size_t n = s.errors.size();
    if (n == 0) throw std::invalid_argument("empty sample series");
    std::vector<double> sq(n);
    if (M == 0) {
        for (std::size_t i = 0; i < n; ++i) sq[i] = s.errors[i] * s.errors[i];
    } else {
        auto approx = phi::partial_sum_phi(s.q, M, s.x, trunc);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = s.errors[i] - approx[i];
            sq[i] = g * g;
        }
    }
    return pairwise_sum(sq) / double(n);
}

double theorem4_l2_gap(const lattice::GroupParams& params, const arith::ArithTables& tables, std::uint64_t X,
                       std::uint64_t n, std::uint64_t M, const phi::PhiTruncation& trunc) {
    return theorem4_l2_gap(sample_errors(params, tables, X, n), M, trunc);
}

Histogram histogram(const SampleSeries& s, std::size_t bins) {
    if (s.errors.empty()) throw std::invalid_argument("empty sample series");
    Histogram h;
    const double lo = s.min, hi = s.max;
    const double span = std::max(hi - lo, 1e-300);
    if (bins == 0) {
        std::vector<double> e(s.errors);
        std::sort(e.begin(), e.end());
        auto quantile = [&](double p) {
            double pos = p * double(e.size() - 1);
            std::size_t i = std::size_t(pos);
            double t = pos - double(i);
            return i + 1 < e.size() ? (1 - t) * e[i] + t * e[i + 1] : e[i];
        };
        const double iqr = quantile(0.75) - quantile(0.25);
        const double w = 2.0 * iqr / std::cbrt(double(e.size()));
        bins = (w > 0) ? std::size_t(std::ceil(span / w)) : 1;
        bins = std::clamp<std::size_t>(bins, 1, 10000);
        h.rule = "freedman-diaconis";
    } else {
        h.rule = "fixed";
    }
    h.lo = lo;
    h.width = span / double(bins);
    h.counts.assign(bins, 0);
    for (double v : s.errors) {
        std::size_t b = std::size_t((v - lo) / h.width);
        ++h.counts[std::min(b, bins - 1)];
    }
    return h;
}

}  // namespace hlat::empirical
