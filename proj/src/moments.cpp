#include "hlat/moments.hpp"

#include <algorithm>
#include <array>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace hlat::moments {

namespace {

using cplx = std::complex<double>;

// A reduced fraction n/d with d > 0; the key of every rational-constraint map.
struct Frac {
    std::int64_t n = 0;
    std::int64_t d = 1;
    bool operator==(const Frac& o) const { return n == o.n && d == o.d; }
};
struct FracHash {
    std::size_t operator()(const Frac& f) const {
        std::uint64_t h = std::uint64_t(f.n) * 0x9E3779B97F4A7C15ull;
        h ^= std::uint64_t(f.d) + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
        return std::size_t(h);
    }
};
using FracMap = std::unordered_map<Frac, cplx, FracHash>;

Frac make_frac(std::int64_t n, std::int64_t d) {
    if (n == 0) return {0, 1};
    std::int64_t g = std::int64_t(gcd_u64(std::uint64_t(n < 0 ? -n : n), std::uint64_t(d)));
    return {n / g, d / g};
}

Frac add(const Frac& a, const Frac& b) {
    std::int64_t g = std::int64_t(gcd_u64(std::uint64_t(a.d), std::uint64_t(b.d)));
    i128 den = i128(a.d / g) * b.d;
    i128 num = i128(a.n) * (b.d / g) + i128(b.n) * (a.d / g);
    if (den > i128(INT64_MAX) || num > i128(INT64_MAX) || num < -i128(INT64_MAX))
        throw BudgetError("rational constraint denominators exceed 63 bits");
    return make_frac(std::int64_t(num), std::int64_t(den));
}

// (π^{q−1}/Γ(q))
double pi_gamma(int q) { return std::pow(std::numbers::pi, q - 1) / std::tgamma(double(q)); }

double mu2(std::uint64_t m) { return arith::is_squarefree(m) ? 1.0 : 0.0; }

// |𝔯(mk²,d;q)| ≤ c(d)·r₂(mk²,d;q)
phi::ClassWeights frak_weights(int q) { return {std::ldexp(1.0, q), 1.0, 0.0, 1.0}; }

struct Atoms {
    FracMap w;         // signed atoms keyed by e·ε(d)k/d, weight v·e^{iπe/4}
    double abs_sum = 0;  // Σ |v| over (d,k) in the box (one sign)
    std::size_t count = 0;
};

Atoms build_atoms(int q, std::uint64_t m, const Depth& depth) {
    Atoms a;
    const double s = q - 1.5;
    const cplx rot_p = std::polar(1.0, std::numbers::pi / 4), rot_m = std::conj(rot_p);
    CompensatedSum abs_sum;
    for (std::uint64_t k = 1; k <= depth.K; ++k) {
        arith::WeightedReps reps(m * k * k, q);
        if (reps.reps().empty()) continue;
        const double kdecay = double(k) * std::sqrt(double(k));
        for (std::uint64_t d = 1; d <= depth.D; ++d) {
            double r = arith::frak_r(reps, k, d, q);
            if (r == 0.0) continue;
            double v = r / (std::pow(double(d), s) * kdecay);
            abs_sum += std::fabs(v);
            ++a.count;
            std::int64_t num = std::int64_t(k) * arith::epsilon(d, q);
            a.w[make_frac(num, std::int64_t(d))] += v * rot_p;
            a.w[make_frac(-num, std::int64_t(d))] += v * rot_m;
        }
    }
    a.abs_sum = abs_sum.value();
    return a;
}

FracMap convolve(const FracMap& A, const FracMap& W, std::uint64_t& work, std::uint64_t cap) {
    if (work + std::uint64_t(A.size()) * W.size() > cap)
        throw BudgetError("rational-constraint enumeration exceeds the combination budget");
    work += std::uint64_t(A.size()) * W.size();
    FracMap out;
    out.reserve(A.size() * 4);
    for (const auto& [fa, va] : A)
        for (const auto& [fw, vw] : W) out[add(fa, fw)] += va * vw;
    return out;
}

// Σ over ℓ-tuples of signed atoms whose fractions sum to 0 of the product of weights.
cplx constrained_sum(const FracMap& W, int l, std::uint64_t& work, std::uint64_t cap) {
    const int h1 = (l + 1) / 2, h2 = l / 2;
    FracMap A = W;
    for (int i = 1; i < h1; ++i) A = convolve(A, W, work, cap);
    FracMap B = W;
    for (int i = 1; i < h2; ++i) B = convolve(B, W, work, cap);
    // deterministic order: sort the keys of the smaller side
    std::vector<std::pair<Frac, cplx>> side(A.begin(), A.end());
    std::sort(side.begin(), side.end(), [](const auto& x, const auto& y) {
        return x.first.d != y.first.d ? x.first.d < y.first.d : x.first.n < y.first.n;
    });
    work += side.size();
    cplx total = 0;
    for (const auto& [f, v] : side) {
        auto it = B.find(Frac{-f.n, f.d});
        if (it != B.end()) total += v * it->second;
    }
    return total;
}

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::Analytic: return "analytic";
        case Method::Closed2: return "closed2";
        case Method::Ergodic: return "ergodic";
        case Method::Empirical: return "empirical";
    }
    return "?";
}

MomentValue q_analytic(int q, std::uint64_t m, int l, const Depth& depth, const AnalyticOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (l < 1) throw std::invalid_argument("l must be at least 1");
    if (depth.D == 0 || depth.K == 0) throw std::invalid_argument("depth D, K must be positive");
    MomentValue res;
    res.method = Method::Analytic;
    res.D = depth.D;
    res.K = depth.K;
    res.depth = l;
    // ℓ = 1: the constraint e·ε(d)k/d = 0 has no solutions
    if (l == 1 || !arith::phi_support(m)) return res;

    Atoms atoms = build_atoms(q, m, depth);
    std::uint64_t work = 0;
    cplx total = constrained_sum(atoms.w, l, work, opt.max_combinations);
    const double pre = std::pow(-pi_gamma(q) / 4.0, l) * mu2(m) / std::pow(double(m), 0.75 * l);
    res.value = pre * total.real();
    res.work = work;

    const double apre = std::fabs(pre);
    if (l == 2) {
        // the constraint pairs each atom with its own negative, so the dropped
        // tuples are exactly the out-of-box pairs
        res.error_estimate = apre * 2.0 * phi::dropped_sq_majorant(q, m, depth.D, depth.K, frak_weights(q));
    } else {
        // tuples with at least one atom outside the box, constraint ignored
        double t_out = phi::dropped_abs_majorant(q, m, depth.D, depth.K, frak_weights(q));
        double t_in = atoms.abs_sum;
        res.error_estimate = apre * std::ldexp(1.0, l) * (std::pow(t_in + t_out, l) - std::pow(t_in, l));
    }
    if (opt.with_convergence_delta && (depth.D > 1 || depth.K > 1)) {
        AnalyticOptions half = opt;
        half.with_convergence_delta = false;
        Depth hd{std::max<std::uint64_t>(1, depth.D / 2), std::max<std::uint64_t>(1, depth.K / 2)};
        res.convergence_delta = std::fabs(res.value - q_analytic(q, m, l, hd, half).value);
    }
    return res;
}

MomentValue q2_closed(int q, std::uint64_t m, const Depth& depth) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (depth.D == 0 || depth.K == 0) throw std::invalid_argument("depth D, K must be positive");
    MomentValue res;
    res.method = Method::Closed2;
    res.D = depth.D;
    res.K = depth.K;
    res.depth = 2;
    if (!arith::phi_support(m)) return res;

    const double p = 2.0 * q - 3.0;
    const double four_q = std::ldexp(1.0, 2 * q);
    CompensatedSum sum;
    for (std::uint64_t k = 1; k <= depth.K; ++k) {
        const std::uint64_t n = m * k * k;
        arith::WeightedReps reps(n, q);
        const double k3 = double(k) * double(k) * double(k);
        CompensatedSum row;
        for (std::uint64_t d = 1; d <= depth.D; ++d) {
            if (d % 4 == 2 || gcd_u64(d, n) != 1) continue;
            double r;
            if (d % 2 == 1)
                r = reps.weighted(d);
            else
                r = (q % 2 == 0) ? reps.weighted(d) : reps.weighted_chi(d);
            if (r == 0.0) continue;
            row += (d % 2 == 1 ? 1.0 : four_q) * r * r / std::pow(double(d), p);
        }
        sum += row.value() / k3;
        res.work += depth.D;
    }
    const double g = pi_gamma(q);
    const double pre = 0.125 * g * g * mu2(m) / std::pow(double(m), 1.5);
    res.value = pre * sum.value();
    res.error_estimate = pre * phi::dropped_sq_majorant(q, m, depth.D, depth.K, frak_weights(q));
    return res;
}

MomentValue q_ergodic(int q, std::uint64_t m, int l, std::uint64_t D, const ErgodicOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (l < 1) throw std::invalid_argument("l must be at least 1");
    if (D == 0) throw std::invalid_argument("D must be positive");
    const std::uint64_t K = opt.K ? opt.K : D;
    MomentValue res;
    res.method = Method::Ergodic;
    res.D = D;
    res.K = K;
    res.depth = l;
    if (!arith::phi_support(m)) return res;

    phi::PhiSeries series(q, m, D, K);
    const std::uint64_t P = series.period();
    std::uint64_t s = opt.samples_per_unit ? opt.samples_per_unit : std::uint64_t(l) * K + 1;

    constexpr std::size_t kChunk = 1 << 14;
    std::vector<double> buf(kChunk);
    // Σ φ(t_j)^ℓ over j ≡ j0 (mod stride), j < size
    auto power_sum = [&](const phi::GridSampler& g, std::uint64_t j0, std::uint64_t stride) {
        CompensatedSum total;
        const std::uint64_t count = (g.size() - j0 + stride - 1) / stride;
        for (std::uint64_t i = 0; i < count; i += kChunk) {
            std::size_t c = std::size_t(std::min<std::uint64_t>(kChunk, count - i));
            g.sample(j0 + i * stride, stride, c, buf.data());
            for (std::size_t t = 0; t < c; ++t) {
                double v = buf[t], pw = v;
                for (int e = 1; e < l; ++e) pw *= v;
                buf[t] = pw;
            }
            total += pairwise_sum(buf.data(), c);
        }
        return total.value();
    };

    auto check_budget = [&](std::uint64_t spu) {
        if (u128(P) * spu > opt.max_samples)
            throw BudgetError("ergodic quadrature needs " + to_string(u128(P) * spu) + " samples");
    };
    check_budget(s);
    double S = power_sum(phi::GridSampler(series, s), 0, 1);
    double est = S / (double(P) * double(s));
    double delta = 0;
    for (;;) {
        check_budget(2 * s);
        // the coarse grid is the even half of the fine one
        double S2 = S + power_sum(phi::GridSampler(series, 2 * s), 1, 2);
        s *= 2;
        double est2 = S2 / (double(P) * double(s));
        delta = std::fabs(est2 - est);
        S = S2;
        est = est2;
        if (delta < opt.tolerance) break;
    }
    res.value = est;
    res.work = P * s;

    double trunc_err = 0;
    if (!opt.truncation_error) {
    } else if (l == 2) {
        trunc_err = phi::l2_tail_bound(q, m, D, K).mean_square_error(std::sqrt(series.mean_square()));
    } else if (l >= 3) {
        // E|φ_t^{ℓ−j}δ^j| ≤ A^{ℓ−j}·T^{j−1}·‖δ‖₂ with A = sup|φ_t|, T = sup|δ|
        const double A = series.amplitude_sum();
        const double T = phi::tail_bound_for(q, m, D, K);
        const double n2 = phi::l2_tail_bound(q, m, D, K).norm();
        for (int j = 1; j <= l; ++j) trunc_err += binom(l, j) * std::pow(A, l - j) * std::pow(T, j - 1) * n2;
    }
    res.error_estimate = delta + trunc_err;
    res.convergence_delta = delta;
    return res;
}

const VarianceSeries& variance_series(int q, std::uint64_t N, std::uint64_t m_report) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (N < 64 || N > (std::uint64_t(1) << 28)) throw std::invalid_argument("variance series length out of range");
    static std::mutex mu;
    static std::map<std::tuple<int, std::uint64_t, std::uint64_t>, VarianceSeries> memo;
    std::lock_guard<std::mutex> guard(mu);
    const auto key = std::make_tuple(q, N, m_report);
    if (auto it = memo.find(key); it != memo.end()) return it->second;

    // Every n = mk² (m square-free) appears once:
    //   F(n) = Σ_{d odd, (d,n)=1} r₂(n,d)²/d^{2q−3} + 2^{2q} Σ_{4|d, (d,n)=1} R(n,d)²/d^{2q−3},
    // R = r₂ (q even) or r_{2,χ} (q odd), and the series is ½(π^{q−1}/2Γ(q))² Σ_n F(n)/n^{3/2}.
    // Representations are grouped by (|a|,|b|); a pair with b ≠ 0 feeds the
    // divisors of b coprime to a, while b = 0 (n a square) feeds every d.
    const std::uint32_t root = std::uint32_t(isqrt(N));
    std::vector<std::uint32_t> start(N + 2, 0);
    for (std::uint64_t a = 0; a <= root; ++a)
        for (std::uint64_t b = 0; a * a + b * b <= N; ++b)
            if (a + b > 0) ++start[a * a + b * b + 1];
    for (std::uint64_t n = 1; n <= N + 1; ++n) start[n] += start[n - 1];
    std::vector<std::uint32_t> pairs(start[N + 1]);  // a | b << 16
    {
        std::vector<std::uint32_t> fill(start.begin(), start.end() - 1);
        for (std::uint64_t a = 0; a <= root; ++a)
            for (std::uint64_t b = 0; a * a + b * b <= N; ++b)
                if (a + b > 0) pairs[fill[a * a + b * b]++] = std::uint32_t(a | (b << 16));
    }
    std::vector<std::vector<std::uint32_t>> divs(root + 1);
    for (std::uint32_t d = 1; d <= root; ++d)
        if (d % 4 != 2)
            for (std::uint32_t b = d; b <= root; b += d) divs[b].push_back(d);
    std::vector<double> inv_pow(root + 1, 0.0);
    const double p = 2.0 * q - 3.0;
    for (std::uint32_t d = 1; d <= root; ++d) inv_pow[d] = std::pow(double(d), -p);
    const auto& spf = arith::spf_table(std::uint32_t(N));
    const double zeta_p = arith::zeta(p);
    const double four_q = std::ldexp(1.0, 2 * q);
    const double half_exp = 0.5 * (q - 1);
    const bool odd_q = q % 2 == 1;

    VarianceSeries vs;
    vs.q = q;
    vs.N = N;
    vs.checkpoints = {N / 8, N / 4, N / 2, N};
    vs.q2_by_m.assign(m_report + 1, 0.0);
    std::vector<double> acc_odd(root + 1, 0.0), acc_zero(root + 1, 0.0);
    std::vector<char> mark(root + 1, 0);
    std::vector<std::uint32_t> touched;
    CompensatedSum total;
    std::size_t next_cp = 0;
    for (std::uint64_t n = 1; n <= N; ++n) {
        const std::uint32_t lo = start[n], hi = start[n + 1];
        if (lo != hi) {
            const double dn = double(n);
            double base = 0, base_z = 0;
            touched.clear();
            for (std::uint32_t i = lo; i < hi; ++i) {
                const std::uint32_t a = pairs[i] & 0xFFFF, b = pairs[i] >> 16;
                const double w = std::pow(double(a) * double(a) / dn, half_exp) * ((a ? 2 : 1) * (b ? 2 : 1));
                const double wz = odd_q ? w * arith::chi4(a) : w;
                if (b == 0) {
                    base += w;
                    base_z += wz;
                    continue;
                }
                for (std::uint32_t d : divs[b]) {
                    if (gcd_u64(d, a) != 1) continue;
                    if (!mark[d]) {
                        mark[d] = 1;
                        touched.push_back(d);
                    }
                    if (d % 2 == 1)
                        acc_odd[d] += w;
                    else
                        acc_zero[d] += wz;
                }
            }
            std::sort(touched.begin(), touched.end());
            double F = 0, Fz = 0;
            for (std::uint32_t d : touched) {
                if (d % 2 == 1) {
                    double v = acc_odd[d] + base;
                    F += (v * v - base * base) * inv_pow[d];
                } else {
                    double v = acc_zero[d] + base_z;
                    Fz += (v * v - base_z * base_z) * inv_pow[d];
                }
                acc_odd[d] = acc_zero[d] = 0.0;
                mark[d] = 0;
            }
            if (base != 0.0 || base_z != 0.0) {
                // the untouched d: Σ over d coprime to n of d^{−p}, by class
                double prod = 1.0;
                for (std::uint64_t t = n; t > 1;) {
                    std::uint32_t r = spf[t];
                    while (t % r == 0) t /= r;
                    if (r != 2) prod *= 1.0 - std::pow(double(r), -p);
                }
                F += base * base * zeta_p * (1.0 - std::pow(2.0, -p)) * prod;
                if (n % 2 == 1) Fz += base_z * base_z * zeta_p * std::pow(4.0, -p) * prod;
            }
            const double term = (F + four_q * Fz) / (dn * std::sqrt(dn));
            total += term;
            // square-free part of n
            std::uint64_t sf = 1;
            for (std::uint64_t t = n; t > 1;) {
                std::uint32_t r = spf[t];
                int e = 0;
                while (t % r == 0) {
                    t /= r;
                    ++e;
                }
                if (e % 2) sf *= r;
            }
            if (sf <= m_report) vs.q2_by_m[sf] += term;
        }
        while (next_cp < vs.checkpoints.size() && vs.checkpoints[next_cp] == n) {
            vs.partial_at.push_back(total.value());
            ++next_cp;
        }
    }
    const double g = pi_gamma(q);
    const double C2 = 0.125 * g * g;
    for (double& v : vs.partial_at) v *= C2;
    for (double& v : vs.q2_by_m) v *= C2;
    vs.partial = vs.partial_at.back();

    // S(N) = S∞ − (A log N + B)/√N through three consecutive checkpoints
    auto extrapolate = [&](std::size_t i0) {
        double M[3][4];
        for (int r = 0; r < 3; ++r) {
            double x = double(vs.checkpoints[i0 + r]);
            M[r][0] = 1.0;
            M[r][1] = -std::log(x) / std::sqrt(x);
            M[r][2] = -1.0 / std::sqrt(x);
            M[r][3] = vs.partial_at[i0 + r];
        }
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int r = c + 1; r < 3; ++r)
                if (std::fabs(M[r][c]) > std::fabs(M[piv][c])) piv = r;
            std::swap(M[c], M[piv]);
            for (int r = 0; r < 3; ++r) {
                if (r == c) continue;
                double f = M[r][c] / M[c][c];
                for (int k = c; k < 4; ++k) M[r][k] -= f * M[c][k];
            }
        }
        return M[0][3] / M[0][0];
    };
    double e_hi = extrapolate(1), e_lo = extrapolate(0);
    vs.value = e_hi;
    vs.error = 2.0 * std::fabs(e_hi - e_lo);
    return memo.emplace(key, std::move(vs)).first->second;
}

double q3_upper_bound(int q, std::uint64_t m, std::uint64_t K_max) {
    if (!arith::phi_support(m)) return 0.0;
    const double c = pi_gamma(q) / std::ldexp(1.0, q + 1);
    CompensatedSum s;
    for (std::uint64_t k = 1; k <= K_max; ++k) {
        double r = double(arith::r2_count(m * k * k));
        s += r * r * r / std::pow(double(k), 4.5);
    }
    return -c * c * c * s.value() / std::pow(double(m), 2.25);
}

MomentValue density_moment(int q, int j, std::uint64_t M_max, const DensityMomentOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (j < 1) throw std::invalid_argument("j must be positive");
    if (M_max == 0) throw std::invalid_argument("M_max must be positive");
    if (j > opt.max_j) throw BudgetError("density moment order " + std::to_string(j) + " exceeds the budget");
    MomentValue res;
    res.method = Method::Analytic;
    res.D = opt.depth.D;
    res.K = opt.depth.K;
    res.depth = j;

    // moments of the partial sums Σ_{m'≤m} φ_{m'} as independent blocks, with
    // a running first-order error bound
    auto run = [&](std::uint64_t Mtop, std::vector<double>& mom, std::vector<double>& err) {
        mom.assign(j + 1, 0.0);
        err.assign(j + 1, 0.0);
        mom[0] = 1.0;
        for (std::uint64_t m = 1; m <= Mtop; ++m) {
            if (!arith::phi_support(m)) continue;
            std::vector<double> Q(j + 1, 0.0), eQ(j + 1, 0.0);
            Q[0] = 1.0;
            for (int l = 1; l <= j; ++l) {
                if (l == 1 && opt.prune) continue;
                MomentValue v = (l == 2) ? q2_closed(q, m, opt.depth2) : q_analytic(q, m, l, opt.depth);
                Q[l] = v.value;
                eQ[l] = (l == 2) ? v.error_estimate : v.convergence_delta;
            }
            std::vector<double> nm(j + 1, 0.0), ne(j + 1, 0.0);
            for (int i = 0; i <= j; ++i)
                for (int l = 0; l <= i; ++l) {
                    if (l == 1 && opt.prune) continue;
                    double c = binom(i, l);
                    nm[i] += c * mom[i - l] * Q[l];
                    ne[i] += c * (std::fabs(mom[i - l]) * eQ[l] + err[i - l] * (std::fabs(Q[l]) + eQ[l]));
                }
            mom.swap(nm);
            err.swap(ne);
        }
    };
    std::vector<double> mom, err;
    run(M_max, mom, err);
    res.value = mom[j];
    double tail = 0;
    if (j == 2) {
        const auto& vs = variance_series(q);
        if (M_max < vs.q2_by_m.size()) {
            double head = 0;
            for (std::uint64_t m = 1; m <= M_max; ++m) head += vs.q2_by_m[m];
            tail = std::max(0.0, vs.value - head) + vs.error;
        } else {
            tail = vs.error;
        }
    } else if (j >= 3) {
        // no rate is available for blocks with ℓ ≥ 3: the change from M/2 to M,
        // scaled by the M^{−1/2} decay of the variance tail (Σ 2^{−i/2} ≈ 2.41)
        std::vector<double> mh, eh;
        run(std::max<std::uint64_t>(1, M_max / 2), mh, eh);
        tail = 2.5 * std::fabs(mom[j] - mh[j]);
    }
    res.error_estimate = err[j] + tail;
    res.work = M_max;
    return res;
}

ThirdMomentSum third_moment_sum(int q, std::uint64_t M_max, const Depth& depth) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (M_max == 0) throw std::invalid_argument("M_max must be positive");
    ThirdMomentSum out;
    out.per_m.assign(M_max + 1, 0.0);
    out.sum.method = Method::Analytic;
    out.sum.D = depth.D;
    out.sum.K = depth.K;
    out.sum.depth = 3;
    CompensatedSum s, maj, conv;
    for (std::uint64_t m = 1; m <= M_max; ++m) {
        if (!arith::phi_support(m)) continue;
        MomentValue v = q_analytic(q, m, 3, depth);
        out.per_m[m] = v.value;
        if (v.value > 0) out.all_nonpositive = false;
        s += v.value;
        maj += v.error_estimate;
        conv += v.convergence_delta;
        out.sum.work += v.work;
    }
    out.sum.value = s.value();
    out.sum.error_estimate = maj.value();
    out.sum.convergence_delta = conv.value();

    // Each Q(m,3) ≤ q3_upper_bound(m) ≤ 0, so the tail over m > M_max can only
    // push the sum further below zero. Its size is estimated by scaling the
    // bound with the ratio observed on (M_max/2, M_max].
    double observed = 0, bound_near = 0;
    for (std::uint64_t m = M_max / 2 + 1; m <= M_max; ++m) {
        observed += std::fabs(out.per_m[m]);
        bound_near += std::fabs(q3_upper_bound(q, m, 64));
    }
    CompensatedSum far;
    for (std::uint64_t m = M_max + 1; m <= 64 * M_max; ++m) far += std::fabs(q3_upper_bound(q, m, 64));
    out.tail_min_magnitude = far.value();
    const double ratio = bound_near > 0 ? observed / bound_near : 1.0;
    out.tail_magnitude_estimate = std::max(1.0, ratio) * far.value() * 1.1;
    return out;
}

}  // namespace hlat::moments
