#include "hlat/phi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <unordered_map>

namespace hlat::phi {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Beyond this k the r₂(mk²) majorants switch from exact values to the
// Dirichlet-series remainders.
constexpr std::uint32_t kExactK = 1u << 20;

// For one k: r₂(mk²,d;q) and r_{2,χ}(mk²,d;q) for d ≤ bmax, plus the part coming
// from representations with b = 0 (only when mk² is a square), which is all
// that remains for d > bmax.
struct Row {
    std::uint64_t bmax = 0;
    std::vector<double> r, rchi;
    double r0 = 0, r0chi = 0;
    double at(std::uint64_t d) const { return d <= bmax ? r[d] : r0; }
    double chi_at(std::uint64_t d) const { return d <= bmax ? rchi[d] : r0chi; }
};

Row make_row(std::uint64_t m, std::uint64_t k, int q) {
    const std::uint64_t n = m * k * k;
    Row row;
    auto reps = arith::representations(n);
    for (const auto& rep : reps) row.bmax = std::max<std::uint64_t>(row.bmax, std::uint64_t(std::llabs(rep.b)));
    row.r.assign(row.bmax + 1, 0.0);
    row.rchi.assign(row.bmax + 1, 0.0);
    for (const auto& rep : reps) {
        auto a = std::uint64_t(std::llabs(rep.a)), b = std::uint64_t(std::llabs(rep.b));
        double w = arith::rep_weight(a, n, q);
        double wc = w * arith::chi4(a);
        if (b == 0) {
            row.r0 += w;
            row.r0chi += wc;
            continue;
        }
        for (std::uint64_t d : arith::divisors(b)) {
            row.r[d] += w;
            row.rchi[d] += wc;
        }
    }
    for (std::uint64_t d = 1; d <= row.bmax; ++d) {
        row.r[d] += row.r0;
        row.rchi[d] += row.r0chi;
    }
    return row;
}

double pow_s(std::uint64_t d, int q) { return std::pow(double(d), q - 1.5); }

// Signed series coefficient of the (d,k) term, without the prefactor and the
// d^{q−3/2}k^{3/2} decay; sets is_cos for the d ≡ 0 (4) part when q is odd.
double coefficient(const Row& row, std::uint64_t d, int q, bool& is_cos) {
    is_cos = false;
    if (q % 2 == 0) return arith::xi(d, q) * row.at(d);
    if (d % 2 == 1) return arith::chi4(d) * row.at(d);
    if (d % 4 == 2) return 0.0;
    is_cos = true;
    double sign = (((q + 1) / 2) % 2 == 0) ? 1.0 : -1.0;  // (−1)^{(q+1)/2}
    return sign * std::ldexp(1.0, q) * row.chi_at(d);
}

// |coefficient| ≤ cls(d)·r₂(mk²,d;q): the class weights by d mod 4.
struct Classes {
    double odd, two, zero;
    explicit Classes(int q) {
        odd = 1.0;
        two = (q % 2 == 0) ? 1.0 : 0.0;
        zero = (q % 2 == 0) ? std::ldexp(1.0, q) - 1.0 : std::ldexp(1.0, q);
    }
    Classes(double o, double t, double z) : odd(o), two(t), zero(z) {}
    double of(std::uint64_t d) const { return d % 2 ? odd : (d % 4 == 2 ? two : zero); }
    // Σ_{d≥1} cls(d) d^{−p}
    double total(double p) const {
        double z = arith::zeta(p), h = std::pow(2.0, -p);
        return z * (odd * (1 - h) + two * h * (1 - h) + zero * h * h);
    }
};

// Σ_{d>L, d in residue class} d^{−p} for the three classes, as closed form minus partial sum.
struct ClassTail {
    double odd = 0, two = 0, zero = 0;
};
ClassTail class_tail(std::uint64_t L, double p) {
    double z = arith::zeta(p), h = std::pow(2.0, -p);
    ClassTail t{z * (1 - h), z * h * (1 - h), z * h * h};
    CompensatedSum so, s2, s0;
    for (std::uint64_t d = 1; d <= L; ++d) {
        double v = std::pow(double(d), -p);
        if (d % 2)
            so += v;
        else if (d % 4 == 2)
            s2 += v;
        else
            s0 += v;
    }
    t.odd = std::max(0.0, t.odd - so.value());
    t.two = std::max(0.0, t.two - s2.value());
    t.zero = std::max(0.0, t.zero - s0.value());
    return t;
}

// Σ_{s ≥ 1} cls(s·d′) s^{−q}: depends on d′ only through d′ mod 4.
double w_full(const Classes& c, std::uint64_t dp, int q) {
    double z = arith::zeta(q), h = std::ldexp(1.0, -q);
    if (dp % 2) return z * (c.odd * (1 - h) + c.two * h * (1 - h) + c.zero * h * h);
    if (dp % 4 == 2) return z * (c.two * (1 - h) + c.zero * h);
    return z * c.zero;
}

double w_tail(const Classes& c, std::uint64_t dp, int q, std::uint64_t s0) {
    CompensatedSum head;
    for (std::uint64_t s = 1; s <= s0; ++s) head += c.of(s * dp) * std::pow(double(s), -q);
    return std::max(0.0, w_full(c, dp, q) - head.value());
}

// Exact g(k) = r₂(k²)/4 for k ≤ kExactK and the partial sums Σ g k^{−3/2}, Σ g² k^{−3}.
struct SquareTable {
    std::vector<std::uint32_t> g;
    long double s1 = 0, s2 = 0;
};
const SquareTable& square_table() {
    static const SquareTable t = [] {
        SquareTable t;
        const auto& spf = arith::spf_table(kExactK);
        t.g.assign(kExactK + 1, 1);
        for (std::uint32_t k = 2; k <= kExactK; ++k) {
            std::uint32_t p = spf[k], n = k;
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            t.g[k] = t.g[n] * ((p % 4 == 1) ? std::uint32_t(2 * e + 1) : 1u);
        }
        for (std::uint32_t k = kExactK; k >= 1; --k) {
            long double gk = t.g[k], kk = k;
            t.s1 += gk / (kk * std::sqrt(kk));
            t.s2 += gk * gk / (kk * kk * kk);
        }
        return t;
    }();
    return t;
}

// r₂(mk²) for square-free m without primes ≡ 3 (4), via the factorization of k.
std::uint64_t r2_mk2(std::uint64_t m, std::uint64_t r2m, std::uint32_t k) {
    const auto& spf = arith::spf_table(kExactK);
    std::uint64_t v = r2m;
    while (k > 1) {
        std::uint32_t p = spf[k];
        int e = 0;
        while (k % p == 0) {
            k /= p;
            ++e;
        }
        if (p % 4 == 1) v *= (m % p == 0) ? std::uint64_t(e + 1) : std::uint64_t(2 * e + 1);
    }
    return v;
}

}  // namespace

std::uint64_t lcm_upto(std::uint64_t D) {
    std::uint64_t l = 1;
    for (std::uint64_t d = 2; d <= D; ++d) {
        std::uint64_t g = gcd_u64(l, d);
        u128 next = u128(l / g) * d;
        if (next > (u128(1) << 62)) throw PeriodOverflow("lcm(1.." + std::to_string(D) + ") exceeds 2^62");
        l = std::uint64_t(next);
    }
    return l;
}

double series_prefactor(int q, std::uint64_t m) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (m == 0) throw std::invalid_argument("m must be positive");
    if (!arith::phi_support(m)) return 0.0;
    double pre = (q % 2 == 0) ? arith::rho_q(q) / kTwoPi
                              : std::ldexp(1.0, q - 2) * arith::rho_chi(q) / std::numbers::pi;
    return pre / std::pow(double(m), 0.75);
}

PhiSeries::PhiSeries(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K) : q_(q), m_(m), D_(D), K_(K) {
    if (D == 0 || K == 0) throw std::invalid_argument("truncation D, K must be positive");
    if (D > 0xFFFFFFFFull || K > 0xFFFFFFFFull) throw std::invalid_argument("truncation too large");
    const double pre = series_prefactor(q, m);
    if (pre == 0.0) return;
    for (std::uint64_t k = 1; k <= K; ++k) {
        Row row = make_row(m, k, q);
        const double kdecay = double(k) * std::sqrt(double(k));
        const std::uint64_t top = (row.r0 != 0.0) ? D : std::min(D, row.bmax);
        for (std::uint64_t d = 1; d <= top; ++d) {
            bool is_cos;
            double c = coefficient(row, d, q, is_cos);
            if (c == 0.0) continue;
            terms_.push_back({std::uint32_t(d), std::uint32_t(k), pre * c / (pow_s(d, q) * kdecay), is_cos});
        }
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const PhiTerm& a, const PhiTerm& b) { return a.d != b.d ? a.d < b.d : a.k < b.k; });
}

double PhiSeries::operator()(double t) const {
    // Terms are grouped by d with k ascending; within a group e^{2πik·r/d} is
    // advanced by rotation from the reduced base angle (r = t mod d).
    CompensatedSum sum;
    std::size_t i = 0;
    while (i < terms_.size()) {
        const std::uint32_t d = terms_[i].d;
        const double r = t - double(d) * std::floor(t / double(d));
        const double theta = kTwoPi * r / double(d);
        const double c1 = std::cos(theta), s1 = std::sin(theta);
        double wc = 1.0, ws = 0.0;  // e^{ikθ}
        std::uint32_t kcur = 0;
        double group = 0.0;
        for (; i < terms_.size() && terms_[i].d == d; ++i) {
            const PhiTerm& term = terms_[i];
            if (term.k - kcur > 8) {
                double a = kTwoPi * frac(double(term.k) * r / double(d));
                wc = std::cos(a);
                ws = std::sin(a);
                kcur = term.k;
            }
            while (kcur < term.k) {
                double nc = wc * c1 - ws * s1;
                ws = ws * c1 + wc * s1;
                wc = nc;
                ++kcur;
            }
            // sin(a − π/4) = (sin a − cos a)/√2,  cos(a − π/4) = (cos a + sin a)/√2
            group += term.amp * (term.is_cos ? (wc + ws) : (ws - wc));
        }
        sum += group * std::numbers::sqrt2 * 0.5;
    }
    return sum.value();
}

double PhiSeries::amplitude_sum() const {
    CompensatedSum s;
    for (const auto& t : terms_) s += std::fabs(t.amp);
    return s.value();
}

double PhiSeries::mean_square() const {
    // sin(θ−π/4) and cos(θ−π/4) at one frequency are orthogonal with mean square ½
    std::unordered_map<std::uint64_t, std::pair<double, double>> freq;
    for (const auto& t : terms_) {
        std::uint64_t g = gcd_u64(t.d, t.k);
        auto& slot = freq[((t.d / g) << 32) | (t.k / g)];
        (t.is_cos ? slot.second : slot.first) += t.amp;
    }
    std::vector<std::pair<std::uint64_t, double>> sq;
    sq.reserve(freq.size());
    for (auto& [key, v] : freq) sq.emplace_back(key, v.first * v.first + v.second * v.second);
    std::sort(sq.begin(), sq.end());  // fixed order for reproducibility
    CompensatedSum s;
    for (auto& [key, v] : sq) s += v;
    return 0.5 * s.value();
}

std::uint64_t PhiSeries::period() const { return lcm_upto(D_); }

GridSampler::GridSampler(const PhiSeries& series, std::uint64_t s) : s_(s), size_(0) {
    if (s == 0) throw std::invalid_argument("samples per unit must be positive");
    size_ = series.vanishes() ? s : series.period() * s;
    const auto& terms = series.terms();
    std::size_t i = 0;
    while (i < terms.size()) {
        const std::uint64_t d = terms[i].d, L = d * s;
        std::vector<double> sn(L), cs(L), tab(L, 0.0);
        for (std::uint64_t u = 0; u < L; ++u) {
            sn[u] = std::sin(kTwoPi * double(u) / double(L));
            cs[u] = std::cos(kTwoPi * double(u) / double(L));
        }
        for (; i < terms.size() && terms[i].d == d; ++i) {
            const auto& t = terms[i];
            // sin(θ − π/4) = (sin θ − cos θ)/√2, cos(θ − π/4) = (cos θ + sin θ)/√2
            const double a = t.amp * std::numbers::sqrt2 * 0.5;
            const std::uint64_t kk = t.k % L;
            std::uint64_t idx = 0;
            for (std::uint64_t u = 0; u < L; ++u) {
                double sv = sn[idx], cv = cs[idx];
                tab[u] += t.is_cos ? a * (cv + sv) : a * (sv - cv);
                idx += kk;
                if (idx >= L) idx -= L;
            }
        }
        len_.push_back(L);
        tab_.push_back(std::move(tab));
    }
}

void GridSampler::sample(std::uint64_t j0, std::uint64_t stride, std::size_t count, double* out) const {
    std::fill(out, out + count, 0.0);
    for (std::size_t g = 0; g < tab_.size(); ++g) {
        const std::uint64_t L = len_[g];
        const double* tab = tab_[g].data();
        std::uint64_t idx = j0 % L;
        const std::uint64_t step = stride % L;
        for (std::size_t i = 0; i < count; ++i) {
            out[i] += tab[idx];
            idx += step;
            if (idx >= L) idx -= L;
        }
    }
}

double phi(int q, std::uint64_t m, double t, const PhiTruncation& trunc) {
    return PhiSeries(q, m, trunc.D, trunc.K)(t);
}

double phi_truncated(int q, std::uint64_t m, double t, std::uint64_t n, std::uint64_t K) {
    return PhiSeries(q, m, n, K)(t);
}

double dropped_abs_majorant(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K, const ClassWeights& c) {
    if (!arith::phi_support(m)) return 0.0;
    const double s = q - 1.5;
    auto cls = [&](std::uint64_t d) { return c[d % 4]; };
    const std::uint64_t K2 = std::min<std::uint64_t>(std::max<std::uint64_t>(4 * K, 256), kExactK);

    // k ≤ K2: every dropped term, d ≤ bmax explicitly and the b = 0 remainder
    // (m = 1 only) by class tails.
    CompensatedSum total;
    for (std::uint64_t k = 1; k <= K2; ++k) {
        Row row = make_row(m, k, q);
        const double kdecay = double(k) * std::sqrt(double(k));
        const std::uint64_t from = (k <= K) ? D + 1 : 1;
        CompensatedSum rowsum;
        for (std::uint64_t d = from; d <= row.bmax; ++d) rowsum += cls(d) * row.at(d) / pow_s(d, q);
        if (row.r0 != 0.0) {
            ClassTail ct = class_tail(std::max(row.bmax, from - 1), s);
            rowsum += row.r0 * (c[1] * ct.odd + c[2] * ct.two + c[0] * ct.zero);
        }
        total += rowsum.value() / kdecay;
    }
    // k > K2: Σ_d c(d) r₂(mk²,d)/d^s ≤ r₂(mk²)·Σ_d c(d)/d^s
    const double zc = Classes(c[1], c[2], c[0]).total(s);
    const std::uint64_t r2m = arith::r2_count(m);
    CompensatedSum mid;
    for (std::uint64_t k = K2 + 1; k <= kExactK; ++k) {
        double kk = double(k);
        mid += double(r2_mk2(m, r2m, std::uint32_t(k))) / (kk * std::sqrt(kk));
    }
    total += zc * mid.value();
    // k > kExactK: r₂(mk²) ≤ r₂(m)·g(k) and the closed form of Σ g(k)k^{−3/2}
    double rest = double((long double)arith::square_r2_series(1.5) - square_table().s1) + 1e-9;
    total += zc * double(r2m) * std::max(rest, 0.0);
    return total.value();
}

double dropped_sq_majorant(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K, const ClassWeights& c) {
    if (!arith::phi_support(m)) return 0.0;
    const double s = q - 1.5;
    const std::uint64_t Kbig = std::min<std::uint64_t>(std::max<std::uint64_t>(4 * K, 512), kExactK);
    const std::uint64_t Dbig = std::max<std::uint64_t>(4 * D, Kbig);
    CompensatedSum out, k3;
    for (std::uint64_t k = 1; k <= Kbig; ++k) {
        Row row = make_row(m, k, q);
        const double k3d = double(k) * double(k) * double(k);
        const std::uint64_t top = (row.r0 != 0.0) ? Dbig : row.bmax;
        const std::uint64_t from = (k <= K) ? D + 1 : 1;
        CompensatedSum rowsum;
        for (std::uint64_t d = from; d <= top; ++d) {
            double r = row.at(d) * c[d % 4];
            if (r == 0.0 || gcd_u64(d, k) != 1) continue;
            double ps = pow_s(d, q);
            rowsum += r * r / (ps * ps);
        }
        out += rowsum.value() / k3d;
        if (row.r0 != 0.0) k3 += 1.0 / k3d;
    }
    auto omega_tail = [&](std::uint64_t L) {
        ClassTail ct = class_tail(L, 2 * s);
        return c[1] * c[1] * ct.odd + c[2] * c[2] * ct.two + c[0] * c[0] * ct.zero;
    };
    // m = 1, d > Dbig: only (±k, 0) remains, weight 2
    if (k3.value() > 0) out += 4.0 * omega_tail(Dbig) * k3.value();
    // k > Kbig: Σ_d c(d)² r₂(n,d)²/d^{2s} ≤ r₂(n)²·Ω
    const double omega = omega_tail(0);
    const std::uint64_t r2m = arith::r2_count(m);
    CompensatedSum far;
    for (std::uint64_t k = Kbig + 1; k <= kExactK; ++k) {
        double r = double(r2_mk2(m, r2m, std::uint32_t(k))), kk = double(k);
        far += r * r / (kk * kk * kk);
    }
    double rest = double((long double)arith::square_r2_sq_series(3.0) - square_table().s2) + 1e-13;
    far += double(r2m * r2m) * std::max(rest, 0.0);
    out += omega * far.value();
    return out.value();
}

double tail_bound_for(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K) {
    if (D == 0 || K == 0) throw std::invalid_argument("truncation D, K must be positive");
    const double pre = series_prefactor(q, m);
    if (pre == 0.0) return 0.0;
    const Classes cls(q);
    return pre * dropped_abs_majorant(q, m, D, K, {cls.zero, cls.odd, cls.two, cls.odd});
}

PhiTruncation truncation_for(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K) {
    return {D, K, tail_bound_for(q, m, D, K)};
}

L2Tail l2_tail_bound(int q, std::uint64_t m, std::uint64_t D, std::uint64_t K) {
    if (D == 0 || K == 0) throw std::invalid_argument("truncation D, K must be positive");
    const double pre = series_prefactor(q, m);
    if (pre == 0.0) return {};
    static std::mutex mu;
    static std::map<std::tuple<int, std::uint64_t, std::uint64_t, std::uint64_t>, L2Tail> memo;
    const auto key = std::make_tuple(q, m, D, K);
    {
        std::lock_guard<std::mutex> g(mu);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }

    // Terms (s·d′, s·k′) with gcd(d′,k′) = 1 share the frequency k′/d′, and
    // r₂(m(sk′)², sd′; q) = r₂(mk′², d′; q), so each frequency's dropped
    // amplitude is at most r₂(mk′²,d′)/(d′^{q−3/2}k′^{3/2}) · Σ_{dropped s} cls(sd′)s^{−q}.
    const double s = q - 1.5;
    const Classes cls(q);
    const std::uint64_t Kbig = std::min<std::uint64_t>(std::max<std::uint64_t>(4 * K, 512), kExactK);
    const std::uint64_t Dbig = std::max<std::uint64_t>(4 * D, Kbig);
    const double wf[4] = {w_full(cls, 4, q), w_full(cls, 1, q), w_full(cls, 2, q), w_full(cls, 3, q)};
    CompensatedSum in_sq, out_sq;
    CompensatedSum k3;
    for (std::uint64_t k = 1; k <= Kbig; ++k) {
        Row row = make_row(m, k, q);
        const double kdecay = double(k) * std::sqrt(double(k));
        const std::uint64_t top = (row.r0 != 0.0) ? Dbig : row.bmax;
        for (std::uint64_t d = 1; d <= top; ++d) {
            double r = row.at(d);
            if (r == 0.0 || gcd_u64(d, k) != 1) continue;
            double a = r / (pow_s(d, q) * kdecay);
            if (d <= D && k <= K) {
                std::uint64_t s0 = std::min(D / d, K / k);
                double v = a * w_tail(cls, d, q, s0);
                in_sq += v * v;
            } else {
                double v = a * wf[d % 4];
                out_sq += v * v;
            }
        }
        if (row.r0 != 0.0) k3 += 1.0 / (kdecay * kdecay);
    }
    // m = 1, d′ > Dbig: only the b = 0 pair (±k′, 0) contributes, weight 2
    auto omega_tail = [&](std::uint64_t L) {
        ClassTail ct = class_tail(L, 2 * s);
        double wo = w_full(cls, 1, q), w2 = w_full(cls, 2, q), w0 = w_full(cls, 4, q);
        return wo * wo * ct.odd + w2 * w2 * ct.two + w0 * w0 * ct.zero;
    };
    if (k3.value() > 0) out_sq += 4.0 * omega_tail(Dbig) * k3.value();
    // k′ > Kbig: Σ_d r₂(n,d)² W(d)²/d^{2s} ≤ r₂(n)²·Ω
    const double omega = omega_tail(0);
    const std::uint64_t r2m = arith::r2_count(m);
    CompensatedSum far;
    for (std::uint64_t k = Kbig + 1; k <= kExactK; ++k) {
        double r = double(r2_mk2(m, r2m, std::uint32_t(k))), kk = double(k);
        far += r * r / (kk * kk * kk);
    }
    double rest = double((long double)arith::square_r2_sq_series(3.0) - square_table().s2) + 1e-13;
    far += double(r2m * r2m) * std::max(rest, 0.0);
    out_sq += omega * far.value();

    L2Tail res;
    res.in = pre * std::sqrt(0.5 * in_sq.value());
    res.out_sq = pre * pre * 0.5 * out_sq.value();
    std::lock_guard<std::mutex> g(mu);
    memo[key] = res;
    return res;
}

std::vector<double> partial_sum_phi(int q, std::uint64_t M, const std::vector<double>& x_list,
                                    const PhiTruncation& trunc) {
    if (M == 0) throw std::invalid_argument("M must be positive");
    std::vector<PhiSeries> series;
    for (std::uint64_t m = 1; m <= M; ++m)
        if (arith::phi_support(m)) series.emplace_back(q, m, trunc.D, trunc.K);
    std::vector<double> out(x_list.size(), 0.0);
    parallel_for(x_list.size(), [&](std::size_t i) {
        double x2 = x_list[i] * x_list[i];
        CompensatedSum s;
        for (const auto& ps : series) s += ps(std::sqrt(double(ps.m())) * x2);
        out[i] = s.value();
    });
    return out;
}

double uniform_bound_ratio(const PhiSeries& series, const std::vector<double>& t_list) {
    if (series.vanishes()) return 0.0;
    double mx = 0;
    for (double t : t_list) mx = std::max(mx, std::fabs(series(t)));
    return mx * std::pow(double(series.m()), 0.75) / double(arith::r2_count(series.m()));
}

}  // namespace hlat::phi
