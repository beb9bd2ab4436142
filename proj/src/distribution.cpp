#include "hlat/distribution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "hlat/moments.hpp"

namespace hlat::distribution {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kChunk = 4096;

// Complex running sum with Neumaier compensation on both parts.
struct CSum {
    CompensatedSum re, im;
    void add(cplx z) {
        re += z.real();
        im += z.imag();
    }
    cplx value() const { return {re.value(), im.value()}; }
};

void check_budget(std::uint64_t P, std::uint64_t s, std::uint64_t cap) {
    if (u128(P) * s > cap)
        throw BudgetError("characteristic factor quadrature needs " + to_string(u128(P) * s) + " samples");
}

// Sums of e^{2πiσφ(t)} for many σ at once. Samples are binned by value with
// width δ; within a bin e^{2πiσ(c + r)} = e^{2πiσc}·Σ_p (2πiσr)^p/p!, so only
// the power sums Σ r^p per bin are accumulated. δ keeps π·σ_max·δ ≤ 1/4, where
// kOrder terms leave a relative error below 1e-12.
class BinnedPowers {
public:
    static constexpr int kOrder = 12;

    BinnedPowers(double bound, double sigma_max) {
        delta_ = 0.25 / (std::numbers::pi * std::max(sigma_max, 1e-12));
        lo_ = -bound - delta_;
        nbins_ = std::size_t(std::ceil(2.0 * (bound + delta_) / delta_)) + 1;
        total_.assign(nbins_ * kOrder, CompensatedSum{});
        local_.assign(nbins_ * kOrder, 0.0);
    }

    // adds φ(t_j) for j ≡ j0 (mod stride)
    void add_samples(const phi::GridSampler& g, std::uint64_t j0, std::uint64_t stride) {
        std::vector<double> buf(kChunk);
        const std::uint64_t count = (g.size() - j0 + stride - 1) / stride;
        for (std::uint64_t i = 0; i < count; i += kChunk) {
            std::size_t c = std::size_t(std::min<std::uint64_t>(kChunk, count - i));
            g.sample(j0 + i * stride, stride, c, buf.data());
            std::fill(local_.begin(), local_.end(), 0.0);
            for (std::size_t t = 0; t < c; ++t) {
                double pos = (buf[t] - lo_) / delta_;
                std::size_t b = std::size_t(std::clamp(std::floor(pos), 0.0, double(nbins_ - 1)));
                double r = buf[t] - center(b), rp = 1.0;
                double* mom = &local_[b * kOrder];
                for (int p = 0; p < kOrder; ++p) {
                    mom[p] += rp;
                    rp *= r;
                }
            }
            for (std::size_t k = 0; k < local_.size(); ++k)
                if (local_[k] != 0.0) total_[k] += local_[k];
            count_ += c;
        }
    }

    // mean of e^{2πiσφ} over the samples added so far
    cplx mean(double sigma) const {
        std::array<cplx, kOrder> coef;
        const cplx u(0.0, 2.0 * std::numbers::pi * sigma);
        coef[0] = 1.0;
        for (int p = 1; p < kOrder; ++p) coef[p] = coef[p - 1] * u / double(p);
        CompensatedSum re, im;
        for (std::size_t b = 0; b < nbins_; ++b) {
            const CompensatedSum* mom = &total_[b * kOrder];
            if (mom[0].value() == 0.0) continue;
            cplx inner = 0;
            for (int p = kOrder - 1; p >= 0; --p) inner += coef[p] * mom[p].value();
            const double a = 2.0 * std::numbers::pi * sigma * center(b);
            cplx z = cplx(std::cos(a), std::sin(a)) * inner;
            re += z.real();
            im += z.imag();
        }
        return cplx(re.value(), im.value()) / double(count_);
    }

private:
    double center(std::size_t b) const { return lo_ + (double(b) + 0.5) * delta_; }
    double delta_ = 0, lo_ = 0;
    std::size_t nbins_ = 0;
    std::uint64_t count_ = 0;
    std::vector<CompensatedSum> total_;
    std::vector<double> local_;
};

// Σ_{m>M} r₂(m)²/m^{3/2}: exact to 2^20, then ∫ 4(log t + 1)t^{−3/2} beyond.
double r2sq_tail(std::uint64_t M) {
    constexpr std::uint64_t kTop = 1u << 20;
    static std::once_flag once;
    static std::vector<double> suffix;
    std::call_once(once, [] {
        suffix.assign(kTop + 2, 0.0);
        const double X = double(kTop);
        suffix[kTop + 1] = 8.0 * (std::log(X) + 3.0) / std::sqrt(X);
        for (std::uint64_t m = kTop; m >= 1; --m) {
            double r = double(arith::r2_count(m));
            suffix[m] = suffix[m + 1] + r * r / (double(m) * std::sqrt(double(m)));
        }
    });
    return M + 1 <= kTop + 1 ? suffix[M + 1] : suffix[kTop + 1];
}

}  // namespace

FactorGrid char_factor_grid(int q, std::uint64_t m, double h, std::size_t J, const CharOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    FactorGrid out;
    out.values.assign(J + 1, cplx(1.0, 0.0));
    if (!arith::phi_support(m)) return out;

    phi::PhiSeries series(q, m, opt.D, opt.K);
    out.mean_square = series.mean_square();
    const std::uint64_t P = series.period();
    std::uint64_t s = std::max<std::uint64_t>(4 * opt.K, 8);
    check_budget(P, s, opt.max_samples);
    BinnedPowers acc(series.amplitude_sum(), std::fabs(h) * double(J));
    acc.add_samples(phi::GridSampler(series, s), 0, 1);
    std::vector<cplx> est(J + 1);
    for (std::size_t j = 0; j <= J; ++j) est[j] = acc.mean(double(j) * h);
    for (;;) {
        check_budget(P, 2 * s, opt.max_samples);
        acc.add_samples(phi::GridSampler(series, 2 * s), 1, 2);
        s *= 2;
        double delta = 0;
        for (std::size_t j = 0; j <= J; ++j) {
            cplx e = acc.mean(double(j) * h);
            delta = std::max(delta, std::abs(e - est[j]));
            est[j] = e;
        }
        out.quad_delta = delta;
        if (delta < opt.tolerance) break;
    }
    out.values = std::move(est);
    out.values[0] = 1.0;  // the j = 0 average is Σ1/N
    out.samples = P * s;
    return out;
}

cplx char_factor(int q, cplx alpha, std::uint64_t m, const CharOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (!arith::phi_support(m) || alpha == cplx(0.0)) return 1.0;
    phi::PhiSeries series(q, m, opt.D, opt.K);
    const std::uint64_t P = series.period();
    const cplx coef = cplx(0.0, kTwoPi) * alpha;
    auto run = [&](std::uint64_t s, std::uint64_t j0, std::uint64_t stride, CSum& acc) {
        phi::GridSampler g(series, s);
        std::vector<double> buf(kChunk);
        const std::uint64_t count = (g.size() - j0 + stride - 1) / stride;
        for (std::uint64_t i = 0; i < count; i += kChunk) {
            std::size_t c = std::size_t(std::min<std::uint64_t>(kChunk, count - i));
            g.sample(j0 + i * stride, stride, c, buf.data());
            cplx local = 0;
            for (std::size_t t = 0; t < c; ++t) local += std::exp(coef * buf[t]);
            acc.add(local);
        }
    };
    std::uint64_t s = std::max<std::uint64_t>(4 * opt.K, 8);
    check_budget(P, s, opt.max_samples);
    CSum acc;
    run(s, 0, 1, acc);
    cplx est = acc.value() / (double(P) * double(s));
    for (;;) {
        check_budget(P, 2 * s, opt.max_samples);
        run(2 * s, 1, 2, acc);
        s *= 2;
        cplx e = acc.value() / (double(P) * double(s));
        double delta = std::abs(e - est);
        est = e;
        if (delta < opt.tolerance) break;
    }
    return est;
}

CharFunction char_function(int q, std::uint64_t M, double h, std::size_t J, const CharOptions& opt,
                           bool gaussian_completion) {
    if (M == 0) throw std::invalid_argument("M must be positive");
    CharFunction cf;
    cf.h = h;
    cf.M = M;
    cf.values.assign(J + 1, cplx(1.0, 0.0));
    for (std::uint64_t m = 1; m <= M; ++m) {
        if (!arith::phi_support(m)) continue;
        FactorGrid fg = char_factor_grid(q, m, h, J, opt);
        for (std::size_t j = 0; j <= J; ++j) cf.values[j] *= fg.values[j];
        cf.quad_error += fg.quad_delta;
        cf.captured_variance += fg.mean_square;
    }
    cf.variance_total = moments::variance_series(q).value;
    cf.tail_shape_coefficient = r2sq_tail(M);
    if (gaussian_completion) {
        cf.completion_variance = std::max(0.0, cf.variance_total - cf.captured_variance);
        const double a = 2.0 * std::numbers::pi * std::numbers::pi * cf.completion_variance;
        for (std::size_t j = 0; j <= J; ++j) {
            double sg = double(j) * h;
            cf.values[j] *= std::exp(-a * sg * sg);
        }
    }
    return cf;
}

cplx char_function_at(int q, double sigma, std::uint64_t M, const CharOptions& opt, bool gaussian_completion) {
    if (sigma == 0.0) return 1.0;
    return char_function(q, M, sigma, 1, opt, gaussian_completion).values[1];
}

DensityGrid density(int q, const DensityOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (opt.M == 0) throw std::invalid_argument("M must be positive");
    if (!(opt.x_step > 0)) throw std::invalid_argument("x step must be positive");
    const double V = moments::variance_series(q).value;
    DensityGrid g;
    g.M = opt.M;
    g.trunc = opt.trunc;
    g.x_min = opt.x_min;
    g.x_max = opt.x_max;
    if (g.x_min == 0 && g.x_max == 0) {
        g.x_max = 12.0 * std::sqrt(V);
        g.x_min = -g.x_max;
    }
    if (!(g.x_max > g.x_min)) throw std::invalid_argument("empty x range");
    g.step = opt.x_step;
    const double h = opt.sigma_step > 0 ? opt.sigma_step : 1.0 / (2.0 * (g.x_max - g.x_min));
    g.sigma_step = h;

    CharFunction cf;
    std::size_t J;
    if (opt.A > 0) {
        J = std::size_t(std::ceil(opt.A / h));
        cf = char_function(q, opt.M, h, J, opt.trunc, opt.gaussian_completion);
        if (std::abs(cf.values[J]) >= 1e-9)
            throw CutoffTooSmall("|Phi(A)| = " + std::to_string(std::abs(cf.values[J])) + " at A = " +
                                 std::to_string(opt.A));
    } else {
        // smallest cutoff past which every computed |Φ| stays below 1e-12
        J = std::size_t(std::ceil(0.25 / h));
        for (;;) {
            cf = char_function(q, opt.M, h, J, opt.trunc, opt.gaussian_completion);
            std::size_t last = J;
            while (last > 0 && std::abs(cf.values[last - 1]) < 1e-12) --last;
            if (last < J) {
                J = std::max<std::size_t>(last, 1);
                cf.values.resize(J + 1);
                break;
            }
            if (J > 200000) throw CutoffTooSmall("characteristic function does not fall below 1e-12");
            J *= 2;
        }
    }
    g.A = double(J) * h;
    if (g.step >= 1.0 / (4.0 * g.A)) throw std::invalid_argument("x step must be below 1/(4A)");
    g.Phi = cf.values;
    g.captured_variance = cf.captured_variance;
    g.completion_variance = cf.completion_variance;
    g.variance_total = cf.variance_total;

    // P(x) = ∫Φ(σ)e^{−2πixσ}dσ over [−A, A]; Φ(−σ) = conj Φ(σ) folds it onto σ ≥ 0
    const std::size_t nx = std::size_t(std::floor((g.x_max - g.x_min) / g.step + 1e-9)) + 1;
    g.x.resize(nx);
    g.P.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) g.x[i] = g.x_min + double(i) * g.step;
    parallel_for(nx, [&](std::size_t i) {
        const double x = g.x[i];
        CompensatedSum s;
        s += 0.5 * g.Phi[0].real();
        for (std::size_t j = 1; j <= J; ++j) {
            const double a = -kTwoPi * x * double(j) * h;
            const double re = g.Phi[j].real() * std::cos(a) - g.Phi[j].imag() * std::sin(a);
            s += (j == J ? 0.5 : 1.0) * re;
        }
        g.P[i] = 2.0 * h * s.value();
    });

    // ∫_{|σ|>A}|Φ|: the Gaussian factor bounds every |ℒ| product by 1
    if (cf.completion_variance > 0) {
        const double a = 2.0 * std::numbers::pi * std::numbers::pi * cf.completion_variance;
        g.cutoff_remainder = std::sqrt(std::numbers::pi / a) * std::erfc(g.A * std::sqrt(a));
    } else {
        g.cutoff_remainder = 2.0 * std::abs(g.Phi[J]) * g.A;  // no envelope: heuristic
    }
    g.quad_error = 2.0 * g.A * cf.quad_error;
    g.total_error = g.cutoff_remainder + g.quad_error + 1e-15 * double(J);
    return g;
}

DensityMoments cdf_and_moments(const DensityGrid& grid, int j_max) {
    if (j_max < 0) throw std::invalid_argument("j_max must be non-negative");
    DensityMoments out;
    const std::size_t n = grid.P.size();
    if (n == 0) throw std::invalid_argument("empty density grid");
    out.raw.assign(j_max + 1, 0.0);
    std::vector<CompensatedSum> acc(j_max + 1);
    CompensatedSum a1, a2;
    out.min_P = grid.P[0];
    for (std::size_t i = 0; i < n; ++i) {
        const double w = grid.step * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
        const double x = grid.x[i], p = grid.P[i];
        out.min_P = std::min(out.min_P, p);
        double xp = 1.0;
        for (int j = 0; j <= j_max; ++j) {
            acc[j] += w * xp * p;
            xp *= x;
        }
        a1 += w * std::fabs(x) * p;
        a2 += w * x * x * p;
    }
    for (int j = 0; j <= j_max; ++j) out.raw[j] = acc[j].value();
    out.abs1 = a1.value();
    out.abs2 = a2.value();
    // negative noise is clipped only here, never in the stored samples
    out.cdf.assign(n, 0.0);
    CompensatedSum c;
    for (std::size_t i = 1; i < n; ++i) {
        c += 0.5 * grid.step * (std::max(grid.P[i - 1], 0.0) + std::max(grid.P[i], 0.0));
        out.cdf[i] = std::max(out.cdf[i - 1], c.value());
    }
    return out;
}

MomentBudget moment_budget(int q, const DensityGrid& grid, const DensityMoments& mom) {
    if (mom.raw.size() < 4) throw std::invalid_argument("need moments up to j = 3");
    MomentBudget b;
    for (int j = 0; j < 4; ++j) b.value[j] = mom.raw[j];
    // pointwise error of P integrated against |x|^j over the grid
    const double X = std::max(std::fabs(grid.x_min), std::fabs(grid.x_max));
    auto grid_err = [&](int j) { return grid.total_error * 2.0 * std::pow(X, j + 1) / (j + 1); };

    const auto& vs = moments::variance_series(q);
    b.budget[0] = grid_err(0) + std::fabs(mom.raw[0] - 1.0);
    b.budget[1] = grid_err(1) + std::fabs(mom.raw[1]);
    b.budget[2] = grid_err(2) + vs.error + std::fabs(mom.raw[2] - vs.value);

    // Σ_m mean φ_{m,D,K}³ is the model's exact third moment (the Gaussian part adds none)
    const std::uint64_t Dh = std::max<std::uint64_t>(1, grid.trunc.D / 2);
    const std::uint64_t Kh = std::max<std::uint64_t>(1, grid.trunc.K / 2);
    CompensatedSum m3, m3h, near, bound_near;
    for (std::uint64_t m = 1; m <= grid.M; ++m) {
        if (!arith::phi_support(m)) continue;
        double v = moments::q_ergodic(q, m, 3, grid.trunc.D, {.K = grid.trunc.K, .truncation_error = false}).value;
        m3 += v;
        m3h += moments::q_ergodic(q, m, 3, Dh, {.K = Kh, .truncation_error = false}).value;
        if (2 * m > grid.M) {
            near += std::fabs(v);
            bound_near += std::fabs(moments::q3_upper_bound(q, m, 64));
        }
    }
    CompensatedSum far;
    for (std::uint64_t m = grid.M + 1; m <= 64 * grid.M; ++m) far += std::fabs(moments::q3_upper_bound(q, m, 64));
    const double ratio = bound_near.value() > 0 ? near.value() / bound_near.value() : 1.0;
    b.model_m3 = m3.value();
    b.model_m3_half = m3h.value();
    b.m3_tail = std::max(1.0, ratio) * far.value() * 1.1;
    b.budget[3] = grid_err(3) + std::fabs(b.model_m3 - b.model_m3_half) + b.m3_tail +
                  std::fabs(mom.raw[3] - b.model_m3);
    return b;
}

}  // namespace hlat::distribution
