#include "hlat/voronoi.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace hlat::voronoi {

using lattice::GroupParams;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// (r)^{(q−1)/2} for r = a²/m ∈ [0,1]
inline double half_power(double r, int q) {
    int e = q - 1;
    double w = 1.0;
    for (int i = 0; i < e / 2; ++i) w *= r;
    if (e & 1) w *= std::sqrt(r);
    return w;
}

inline int lambda(std::uint64_t h) { return (h % 4 == 0) ? 1 : ((h % 4 == 2) ? -1 : 0); }

inline double sign_pow(int e) { return (e % 2 == 0) ? 1.0 : -1.0; }

// Largest integer d with d² ≤ H.
std::uint64_t floor_sqrt(double H) {
    auto d = std::uint64_t(std::floor(std::sqrt(H)));
    while (double(d + 1) * double(d + 1) <= H) ++d;
    while (d > 0 && double(d) * double(d) > H) --d;
    return d;
}

template <class Emit>
void generate(const GroupParams& P, double H, unsigned parts, Emit&& emit) {
    if (H < 1) return;
    const int q = P.q;
    const auto Hf = std::uint64_t(std::floor(H));
    const std::uint64_t Dmax = floor_sqrt(H);
    const bool want_S = parts & unsigned(Part::S);
    const bool want_star = parts & unsigned(Part::SStar);
    const double rho = P.even ? P.rho : P.rho_chi;

    if (want_S || want_star) {
        std::vector<double> tau1(Hf + 1), tau1s(Hf + 1);
        for (std::uint64_t h = 1; h <= Hf; ++h) {
            tau1[h] = tau(double(h) / double(Hf + 1));
            tau1s[h] = tau_star(double(h) / double(Hf + 1));
        }
        for (std::uint64_t d = 1; d <= Dmax; ++d) {
            const double dpow = std::pow(double(d), q - 1.5);
            double cS = 0, cC = 0, cStar = 0;
            if (P.even) {
                double x = arith::xi(d, q);
                cS = 2 * rho * x / dpow;
                cStar = 2 * rho * std::fabs(x) / dpow;
            } else {
                cS = std::ldexp(rho, q) * arith::chi4(d) / dpow;
                if (d % 4 == 0) cC = sign_pow((q - 1) / 2) * std::ldexp(rho, 2 * q - 1) / dpow;
                cStar = 2 * rho / dpow;
            }
            const double den2 = double(d) * std::floor(H / double(d)) + double(d);
            for (std::uint64_t h = 1; h <= Hf; ++h) {
                const bool c2 = (h % d == 0);
                const double t2 = c2 ? tau(double(h) / den2) : 0.0;
                const double t2s = c2 ? tau_star(double(h) / den2) : 0.0;
                const std::uint64_t step = c2 ? 1 : d;
                for (std::uint64_t n = 0; n <= h; n += step) {
                    const bool c1 = (n % d == 0);
                    const std::uint64_t m = n * n + h * h;
                    const double half = (n == 0 || n == h) ? 0.5 : 1.0;
                    const double dm = double(m);
                    const double inv = 1.0 / (std::sqrt(dm) * std::sqrt(std::sqrt(dm)));  // m^{-3/4}
                    const double wh = half_power(double(h * h) / dm, q) * half;
                    const double wn = n ? half_power(double(n * n) / dm, q) * half : 0.0;
                    const double freq = std::sqrt(dm) / double(d);
                    if (want_S) {
                        const double f1 = c1 ? tau1[h] * wh : 0.0;
                        const double f2 = c2 ? t2 * wn : 0.0;
                        if (cS != 0) {
                            double a = (f1 + f2) * inv;
                            if (a != 0) emit(Term{freq, cS * a, false});
                        }
                        if (cC != 0) {
                            double achi = 2 * (-arith::chi4(h) * f1 - arith::chi4(n) * f2) * inv;
                            if (achi != 0) emit(Term{freq, cC * achi, true});
                        }
                    }
                    if (want_star) {
                        const double f1 = c1 ? tau1s[h] * wh : 0.0;
                        const double f2 = c2 ? t2s * wn : 0.0;
                        double astar = (f1 + f2) * inv;
                        double coef;
                        if (P.even) {
                            coef = astar;
                        } else {
                            double bstar = 2 * (lambda(h) * f1 + (n % 4 == 0 ? 2 * f2 : 0.0)) * inv;
                            coef = std::ldexp(astar, q - 1) + (d % 4 == 0 ? std::ldexp(bstar, 2 * q - 2) : 0.0);
                        }
                        if (coef != 0 && cStar != 0) emit(Term{freq, cStar * coef, true});
                    }
                }
            }
        }
    }

    const unsigned tparts = unsigned(Part::TChi) | unsigned(Part::TChiTwist) | unsigned(Part::TStar);
    if (q == 3 && (parts & tparts)) {
        const double rc = P.rho_chi;
        for (std::uint64_t d = Dmax + 1; d <= Hf; ++d) {
            const auto hq = std::uint64_t(std::floor(H / double(d)));
            const double dpow = std::pow(double(d), q - 1.5);
            for (std::uint64_t h = 1; h <= hq; ++h) {
                const double dh = dpow * std::pow(double(h), 1.5);
                const double t = double(h) / double(hq + 1);
                const double freq = double(h) / double(d);
                if ((parts & unsigned(Part::TChi)) && arith::chi4(d) != 0)
                    emit(Term{freq, std::ldexp(rc, q - 1) * arith::chi4(d) * tau(t) / dh, false});
                if ((parts & unsigned(Part::TChiTwist)) && d % 4 == 0 && arith::chi4(h) != 0)
                    emit(Term{freq, sign_pow((q + 1) / 2) * std::ldexp(rc, 2 * q - 1) * arith::chi4(h) * tau(t) / dh,
                              true});
                if (parts & unsigned(Part::TStar)) {
                    double lam = std::ldexp(1.0, q - 2) + (d % 4 == 0 ? std::ldexp(1.0, 2 * q - 2) * lambda(h) : 0.0);
                    if (lam != 0) emit(Term{freq, 2 * rc * lam * tau_star(t) / dh, true});
                }
            }
        }
    }
}

}  // namespace

double tau(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("tau: argument outside [0,1]");
    if (t == 0.0) return 1.0 / kPi;
    if (t == 1.0) return 0.0;
    return t * (1 - t) / std::tan(kPi * t) + t / kPi;
}

double tau_star(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("tau_star: argument outside [0,1]");
    return t * (1 - t);
}

Coefficients coefficients(std::uint64_t m, std::uint64_t d, int q, double H) {
    Coefficients c;
    if (m == 0 || d == 0 || H < 1) return c;
    const auto Hf = std::uint64_t(std::floor(H));
    const double den1 = double(Hf + 1);
    const double den2 = double(d) * std::floor(H / double(d)) + double(d);
    const double dm = double(m);
    const double inv = std::pow(dm, -0.75);
    double A = 0, As = 0, Ac = 0, Bs = 0;
    for (std::uint64_t n = 0; 2 * n * n <= m; ++n) {
        std::uint64_t h;
        if (!is_square(m - n * n, &h) || h < 1 || h > Hf || n > h) continue;
        const double half = (n == 0 || n == h) ? 0.5 : 1.0;
        const double wh = half_power(double(h * h) / dm, q) * half;
        const double wn = n ? half_power(double(n * n) / dm, q) * half : 0.0;
        if (n % d == 0) {
            double t = tau(double(h) / den1), ts = tau_star(double(h) / den1);
            A += t * wh;
            As += ts * wh;
            Ac += -arith::chi4(h) * t * wh;
            Bs += lambda(h) * ts * wh;
        }
        if (h % d == 0) {
            double t = tau(double(h) / den2), ts = tau_star(double(h) / den2);
            A += t * wn;
            As += ts * wn;
            Ac += -arith::chi4(n) * t * wn;
            if (n % 4 == 0) Bs += 2 * ts * wn;
        }
    }
    c.a = A * inv;
    c.a_star = As * inv;
    c.a_chi = 2 * Ac * inv;
    c.b_star = 2 * Bs * inv;
    return c;
}

unsigned approximant_parts(int q) {
    return q == 3 ? (Part::S | Part::TChi | Part::TChiTwist) : unsigned(Part::S);
}

void for_each_term(const GroupParams& params, double H, unsigned parts, const std::function<void(const Term&)>& fn) {
    generate(params, H, parts, fn);
}

std::size_t term_count(const GroupParams& params, double H, unsigned parts) {
    std::size_t n = 0;
    generate(params, H, parts, [&n](const Term&) { ++n; });
    return n;
}

double evaluate(const GroupParams& params, double H, unsigned parts, double x2) {
    CompensatedSum s;
    generate(params, H, parts, [&](const Term& t) {
        double ph = 2 * kPi * frac(t.freq * x2) - kPi / 4;
        s.add(t.amp * (t.is_cos ? std::cos(ph) : std::sin(ph)));
    });
    return s.value();
}

double eval_T_sums(const GroupParams& p, double x2, double H) {
    if (p.q != 3) return 0.0;
    return evaluate(p, H, Part::TChi | Part::TChiTwist, x2);
}

std::vector<double> evaluate_on_grid(const GroupParams& params, double H, unsigned parts, double X, std::size_t n) {
    // x_i = X(n+i)/n, so x_i² − x_{i−1}² grows linearly in i: the phase of
    // every term advances by a chirp, tracked by two complex multiplications
    // per step and reseeded exactly every kReseed samples.
    constexpr std::size_t kBatch = 8, kReseed = 128;
    const double X2 = X * X, nn = double(n) * double(n);
    std::vector<double> x2(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double u = double(n + i);
        x2[i] = X2 * u * u / nn;
    }
    std::vector<double> acc(n, 0.0);
    std::vector<CompensatedSum> total(n);

    std::array<double, kBatch> A{}, B{}, F{};
    std::size_t fill = 0;
    auto flush = [&] {
        for (std::size_t j = fill; j < kBatch; ++j) A[j] = B[j] = F[j] = 0.0;
        std::array<double, kBatch> zr, zi, sr, si, cr, ci;
        for (std::size_t j = 0; j < kBatch; ++j) {
            double g = 2 * kPi * frac(F[j] * X2 * 2.0 / nn);
            cr[j] = std::cos(g);
            ci[j] = std::sin(g);
        }
        for (std::size_t b = 0; b < n; b += kReseed) {
            std::size_t e = std::min(n, b + kReseed);
            for (std::size_t j = 0; j < kBatch; ++j) {
                double th = 2 * kPi * frac(F[j] * x2[b]);
                double dt = 2 * kPi * frac(F[j] * X2 * (2.0 * double(n + b) + 1.0) / nn);
                zr[j] = std::cos(th);
                zi[j] = std::sin(th);
                sr[j] = std::cos(dt);
                si[j] = std::sin(dt);
            }
            for (std::size_t i = b; i < e; ++i) {
                std::array<double, kBatch> c;
                for (std::size_t j = 0; j < kBatch; ++j) {
                    c[j] = A[j] * zr[j] + B[j] * zi[j];
                    double nzr = zr[j] * sr[j] - zi[j] * si[j];
                    double nzi = zr[j] * si[j] + zi[j] * sr[j];
                    double nsr = sr[j] * cr[j] - si[j] * ci[j];
                    double nsi = sr[j] * ci[j] + si[j] * cr[j];
                    zr[j] = nzr;
                    zi[j] = nzi;
                    sr[j] = nsr;
                    si[j] = nsi;
                }
                acc[i] += ((c[0] + c[1]) + (c[2] + c[3])) + ((c[4] + c[5]) + (c[6] + c[7]));
            }
        }
        fill = 0;
    };

    std::size_t since_fold = 0;
    auto fold = [&] {
        for (std::size_t i = 0; i < n; ++i) {
            total[i].add(acc[i]);
            acc[i] = 0.0;
        }
        since_fold = 0;
    };

    generate(params, H, parts, [&](const Term& t) {
        // sin(θ − π/4) = (Im z − Re z)/√2, cos(θ − π/4) = (Re z + Im z)/√2
        if (t.is_cos) {
            A[fill] = t.amp * kInvSqrt2;
            B[fill] = t.amp * kInvSqrt2;
        } else {
            A[fill] = -t.amp * kInvSqrt2;
            B[fill] = t.amp * kInvSqrt2;
        }
        F[fill] = t.freq;
        if (++fill == kBatch) flush();
        if (++since_fold == 4096) fold();
    });
    if (fill) flush();
    fold();

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = total[i].value();
    return out;
}

GapResult mean_square_gap(const GroupParams& params, const arith::ArithTables& tables, std::uint64_t X,
                          std::size_t samples, double H) {
    if (X < 1 || samples == 0) throw std::invalid_argument("mean_square_gap: X and samples must be positive");
    if (H <= 0) H = double(X) * double(X) / 2.0;
    auto grid = lattice::sample_grid(X, 1, samples);
    std::vector<double> err(samples);
    parallel_for(samples, [&](std::size_t i) {
        err[i] = double(lattice::normalized_error(params, tables, grid[i]).normalized_error);
    });
    unsigned parts = approximant_parts(params.q);
    auto S = evaluate_on_grid(params, H, parts, double(X), samples);
    GapResult r;
    r.X = double(X);
    r.H = H;
    r.samples = samples;
    CompensatedSum g, e2, s2;
    for (std::size_t i = 0; i < samples; ++i) {
        double d = err[i] - S[i];
        g.add(d * d);
        e2.add(err[i] * err[i]);
        s2.add(S[i] * S[i]);
    }
    r.mean_square_gap = g.value() / double(samples);
    r.empirical_second_moment = e2.value() / double(samples);
    r.approximant_second_moment = s2.value() / double(samples);
    return r;
}

}  // namespace hlat::voronoi
