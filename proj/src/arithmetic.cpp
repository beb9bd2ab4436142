#include "hlat/arithmetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace hlat::arith {

const std::vector<std::uint32_t>& spf_table(std::uint32_t N) {
    static std::mutex mu;
    static std::vector<std::uint32_t> spf;
    std::lock_guard<std::mutex> g(mu);
    if (spf.size() <= N) {
        std::uint32_t n = std::max<std::uint32_t>(N, 1u << 16);
        spf.assign(std::size_t(n) + 1, 0);
        for (std::uint32_t i = 2; i <= n; ++i) {
            if (spf[i]) continue;
            for (std::uint64_t j = i; j <= n; j += i)
                if (!spf[j]) spf[j] = i;
        }
    }
    return spf;
}

std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n) {
    std::vector<std::pair<std::uint64_t, int>> f;
    if (n < (1u << 16)) {
        const auto& spf = spf_table(1u << 16);
        while (n > 1) {
            std::uint64_t p = spf[n];
            int e = 0;
            while (n % p == 0) {
                n /= p;
                ++e;
            }
            f.emplace_back(p, e);
        }
        return f;
    }
    // trial division; arguments here never exceed ~10^12
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        f.emplace_back(p, e);
    }
    if (n > 1) f.emplace_back(n, 1);
    return f;
}

std::vector<std::uint64_t> divisors(std::uint64_t n) {
    std::vector<std::uint64_t> d{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t base = d.size();
        std::uint64_t pk = 1;
        for (int i = 0; i < e; ++i) {
            pk *= p;
            for (std::size_t j = 0; j < base; ++j) d.push_back(d[j] * pk);
        }
    }
    return d;
}

int mobius(std::uint64_t n) {
    int s = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        s = -s;
    }
    return s;
}

bool is_squarefree(std::uint64_t n) { return n >= 1 && mobius(n) != 0; }

bool phi_support(std::uint64_t m) {
    if (m == 0) return false;
    for (auto [p, e] : factorize(m))
        if (e > 1 || p % 4 == 3) return false;
    return true;
}

std::uint64_t r2_count(std::uint64_t n) {
    if (n == 0) return 1;
    std::uint64_t r = 4;
    for (auto [p, e] : factorize(n)) {
        if (p % 4 == 1)
            r *= std::uint64_t(e + 1);
        else if (p % 4 == 3 && (e & 1))
            return 0;
    }
    return r;
}

std::uint64_t divisor_count(std::uint64_t n) {
    std::uint64_t r = 1;
    for (auto [p, e] : factorize(n)) r *= std::uint64_t(e + 1);
    return r;
}

std::vector<Rep> representations(std::uint64_t m) {
    std::vector<Rep> out;
    std::uint64_t top = isqrt(m);
    for (std::uint64_t a = 0; a <= top; ++a) {
        std::uint64_t b;
        if (!is_square(m - a * a, &b)) continue;
        auto sa = std::int64_t(a), sb = std::int64_t(b);
        for (std::int64_t x : {sa, -sa}) {
            for (std::int64_t y : {sb, -sb}) {
                out.push_back({x, y});
                if (sb == 0) break;
            }
            if (sa == 0) break;
        }
    }
    return out;
}

double rep_weight(std::uint64_t a, std::uint64_t m, int q) {
    if (a == 0) return 0.0;
    std::uint64_t num = a * a, den = m;
    std::uint64_t g = gcd_u64(num, den);
    double r = double(num / g) / double(den / g);
    int e = q - 1;
    double w = 1.0;
    for (int i = 0; i < e / 2; ++i) w *= r;
    if (e & 1) w *= std::sqrt(r);
    return w;
}

WeightedReps::WeightedReps(std::uint64_t m, int q) : m_(m), reps_(representations(m)) {
    w_.reserve(reps_.size());
    for (const Rep& r : reps_) w_.push_back(rep_weight(std::uint64_t(std::llabs(r.a)), m, q));
}

double WeightedReps::weighted(std::uint64_t d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < reps_.size(); ++i)
        if (std::uint64_t(std::llabs(reps_[i].b)) % d == 0) s += w_[i];
    return s;
}

double WeightedReps::weighted_chi(std::uint64_t d) const {
    double s = 0.0;
    for (std::size_t i = 0; i < reps_.size(); ++i) {
        if (std::uint64_t(std::llabs(reps_[i].b)) % d) continue;
        int c = chi4(std::uint64_t(std::llabs(reps_[i].a)));
        if (c > 0)
            s += w_[i];
        else if (c < 0)
            s -= w_[i];
    }
    return s;
}

double r2_weighted(std::uint64_t m, std::uint64_t d, int q) { return WeightedReps(m, q).weighted(d); }
double r2_weighted_chi(std::uint64_t m, std::uint64_t d, int q) { return WeightedReps(m, q).weighted_chi(d); }

// ---- r_{2q} tables ---------------------------------------------------------

namespace {

void checked_add(std::uint64_t& acc, std::uint64_t v) {
    if (__builtin_add_overflow(acc, v, &acc))
        throw BudgetError("r_{2q} table entries overflow 64 bits; reduce N or q");
}

}  // namespace

std::filesystem::path prefix_cache_name(const std::filesystem::path& dir, int q, std::uint64_t N) {
    std::ostringstream os;
    os << "r2q_prefix_q" << q << "_N" << N << ".bin";
    return dir / os.str();
}

static const char kMagic[8] = {'H', 'L', 'A', 'T', 'R', '2', 'Q', '\0'};

void save_prefix_cache(const std::filesystem::path& file, int q, const std::vector<std::uint64_t>& prefix) {
    std::filesystem::create_directories(file.parent_path());
    auto tmp = file;
    tmp += ".tmp";
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write cache file " + tmp.string());
    auto put = [&os](std::uint64_t v, int bytes) {
        unsigned char b[8];
        for (int i = 0; i < bytes; ++i) b[i] = (unsigned char)((v >> (8 * i)) & 0xFF);
        os.write(reinterpret_cast<const char*>(b), bytes);
    };
    os.write(kMagic, 8);
    put(std::uint64_t(q), 4);
    put(0, 4);
    put(prefix.size() - 1, 8);
    for (std::uint64_t v : prefix) put(v, 8);
    os.close();
    std::filesystem::rename(tmp, file);
}

std::optional<std::vector<std::uint64_t>> load_prefix_cache(const std::filesystem::path& file, int q,
                                                            std::uint64_t N) {
    std::ifstream is(file, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return std::nullopt;
    auto get = [&is](int bytes) -> std::optional<std::uint64_t> {
        unsigned char b[8];
        if (!is.read(reinterpret_cast<char*>(b), bytes)) return std::nullopt;
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= std::uint64_t(b[i]) << (8 * i);
        return v;
    };
    auto fq = get(4), pad = get(4), fn = get(8);
    if (!fq || !pad || !fn || int(*fq) != q || *fn < N) return std::nullopt;
    std::vector<std::uint64_t> prefix(N + 1);
    std::vector<unsigned char> buf((N + 1) * 8);
    if (!is.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()))) return std::nullopt;
    for (std::uint64_t i = 0; i <= N; ++i) {
        std::uint64_t v = 0;
        for (int j = 0; j < 8; ++j) v |= std::uint64_t(buf[i * 8 + j]) << (8 * j);
        prefix[i] = v;
    }
    return prefix;
}

static std::vector<std::uint64_t> compute_prefix(int q, std::uint64_t N) {
    // r₂ from the two-square sieve
    std::vector<std::uint64_t> cur(N + 1, 0), nxt(N + 1, 0);
    std::uint64_t top = isqrt(N);
    for (std::uint64_t a = 0; a <= top; ++a) {
        for (std::uint64_t b = 0; a * a + b * b <= N; ++b) {
            std::uint64_t mult = (a ? 2 : 1) * (b ? 2 : 1);
            cur[a * a + b * b] += mult;
        }
    }
    // each pass adds one more square: r_{j+1}(n) = r_j(n) + 2 Σ_{a≥1} r_j(n − a²)
    for (int pass = 0; pass < 2 * (q - 1); ++pass) {
        for (std::uint64_t n = 0; n <= N; ++n) {
            std::uint64_t acc = cur[n];
            for (std::uint64_t a = 1; a * a <= n; ++a) {
                checked_add(acc, cur[n - a * a]);
                checked_add(acc, cur[n - a * a]);
            }
            nxt[n] = acc;
        }
        cur.swap(nxt);
    }
    std::uint64_t run = 0;
    for (std::uint64_t n = 0; n <= N; ++n) {
        checked_add(run, cur[n]);
        cur[n] = run;
    }
    return cur;
}

ArithTables build_r2q_prefix(int q, std::uint64_t N, const TableOptions& opt) {
    if (q < 3) throw std::invalid_argument("q must be at least 3");
    if (N < 1) throw std::invalid_argument("table limit N must be positive");
    if (N > (std::uint64_t(1) << 40) || 3 * 8 * (N + 1) > opt.memory_budget_bytes)
        throw BudgetError("r_{2q} table of size " + std::to_string(N) + " exceeds the memory budget");

    ArithTables t;
    t.q = q;
    t.limit = N;
    std::optional<std::vector<std::uint64_t>> cached;
    if (opt.cache_dir) cached = load_prefix_cache(prefix_cache_name(*opt.cache_dir, q, N), q, N);
    if (cached) {
        t.r2q_prefix = std::move(*cached);
    } else {
        t.r2q_prefix = compute_prefix(q, N);
        if (opt.cache_dir) save_prefix_cache(prefix_cache_name(*opt.cache_dir, q, N), q, t.r2q_prefix);
    }

    t.small_limit = std::min(opt.small_limit, N);
    t.r2_reps.resize(t.small_limit + 1);
    for (std::uint64_t m = 1; m <= t.small_limit; ++m) t.r2_reps[m] = representations(m);
    t.mobius.assign(t.small_limit + 1, 1);
    std::vector<bool> composite(t.small_limit + 1, false);
    for (std::uint64_t p = 2; p <= t.small_limit; ++p) {
        if (composite[p]) continue;
        for (std::uint64_t j = p; j <= t.small_limit; j += p) {
            if (j > p) composite[j] = true;
            t.mobius[j] = std::int8_t(-t.mobius[j]);
        }
        for (std::uint64_t j = p * p; j <= t.small_limit; j += p * p) t.mobius[j] = 0;
    }
    t.mobius[0] = 0;
    return t;
}

static std::uint64_t count_rec(int coords, std::uint64_t remaining) {
    if (coords == 0) return remaining == 0 ? 1 : 0;
    std::uint64_t total = count_rec(coords - 1, remaining);
    for (std::uint64_t a = 1; a * a <= remaining; ++a) total += 2 * count_rec(coords - 1, remaining - a * a);
    return total;
}

std::uint64_t r2q_bruteforce(int q, std::uint64_t m) { return count_rec(2 * q, m); }

// ---- ζ and L ------------------------------------------------------------

double zeta(double s) {
    if (!(s > 1.0)) throw std::domain_error("zeta: s must exceed 1");
    // Euler–Maclaurin with N = 64 and four Bernoulli corrections; the remainder
    // is far below double precision for s ≥ 1.1.
    static const long double B[] = {1.0L / 6, -1.0L / 30, 1.0L / 42, -1.0L / 30, 5.0L / 66};
    const int N = 64;
    long double ls = s, sum = 0;
    for (int n = N - 1; n >= 1; --n) sum += std::pow((long double)n, -ls);
    long double Nn = N;
    sum += std::pow(Nn, 1 - ls) / (ls - 1) + 0.5L * std::pow(Nn, -ls);
    long double rising = ls;  // s(s+1)…(s+2k−2)
    long double fact = 2;     // (2k)!
    for (int k = 1; k <= 5; ++k) {
        sum += B[k - 1] / fact * rising * std::pow(Nn, -ls - 2 * k + 1);
        rising *= (ls + 2 * k - 1) * (ls + 2 * k);
        fact *= (2 * k + 1) * (2 * k + 2);
    }
    return double(sum);
}

double l_chi(double s) {
    if (!(s > 1.0)) throw std::domain_error("l_chi: s must exceed 1");
    static std::mutex mu;
    static std::map<double, double> memo;
    {
        std::lock_guard<std::mutex> g(mu);
        if (auto it = memo.find(s); it != memo.end()) return it->second;
    }
    // Alternating series over odd n; averaging the last two partial sums leaves
    // an error far below the first omitted term.
    const std::int64_t J = 200000;
    long double ls = s, sum = 0, last = 0;
    for (std::int64_t j = J; j >= 0; --j) {
        long double t = std::pow((long double)(2 * j + 1), -ls);
        sum += (j & 1) ? -t : t;
        if (j == J) last = (J & 1) ? -t : t;
    }
    double v = double(sum - 0.5L * last);
    std::lock_guard<std::mutex> g(mu);
    memo[s] = v;
    return v;
}

double rho_q(int q) {
    return std::pow(std::numbers::pi, q) / ((1.0 - std::ldexp(1.0, -q)) * std::tgamma(double(q)) * zeta(q));
}

double rho_chi(int q) {
    return std::pow(std::numbers::pi, q) / (std::ldexp(1.0, q - 1) * std::tgamma(double(q)) * l_chi(q));
}

double xi(std::uint64_t d, int q) {
    double v = 0.0;
    int half = q / 2;
    if (d % 2 == 1) v += 1.0;
    if (d % 2 == 0) v += (half % 2 == 0) ? -1.0 : 1.0;  // (−1)^{q/2+1}
    if (d % 4 == 0) v += ((half % 2 == 0) ? 1.0 : -1.0) * std::ldexp(1.0, q);
    return v;
}

double frak_r(const WeightedReps& reps_mk2, std::uint64_t k, std::uint64_t d, int q) {
    if (gcd_u64(k, d) != 1 || d % 4 == 2) return 0.0;
    if (d % 2 == 1) {
        double r = reps_mk2.weighted(d);
        return (q % 2 == 0) ? r : chi4(d) * r;
    }
    double scale = std::ldexp(1.0, q);
    if (q % 2 == 0) {
        double sign = ((q / 2) % 2 == 0) ? 1.0 : -1.0;
        return sign * scale * reps_mk2.weighted(d);
    }
    double sign = (((q - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
    return sign * scale * reps_mk2.weighted_chi(d);
}

double frak_r(std::uint64_t m, std::uint64_t k, std::uint64_t d, int q) {
    if (gcd_u64(k, d) != 1 || d % 4 == 2) return 0.0;
    return frak_r(WeightedReps(m * k * k, q), k, d, q);
}

std::uint64_t square_r2_factor(std::uint64_t k) {
    std::uint64_t g = 1;
    for (auto [p, e] : factorize(k))
        if (p % 4 == 1) g *= std::uint64_t(2 * e + 1);
    return g;
}

double square_r2_series(double s) {
    if (!(s > 1.0)) throw std::domain_error("square_r2_series: s must exceed 1");
    double z = zeta(s);
    return z * z * l_chi(s) / ((1.0 + std::pow(2.0, -s)) * zeta(2 * s));
}

double square_r2_sq_series(double s) {
    if (!(s >= 2.0)) throw std::domain_error("square_r2_sq_series: s must be at least 2");
    // Σ g² k^{−s} = ζ(s)·Π_{p≡1}(1+6x+x²)/(1−x)², x = p^{−s}, and
    // Π_{p≡1}(1−x)^{−2} = ζ(s)L(s)(1−2^{−s})·Π_{p≡3}(1−p^{−2s}); the leftover
    // products converge like Σ p^{−s} and are taken over p ≤ P.
    const std::uint32_t P = 1u << 20;
    const auto& spf = spf_table(P);
    long double prod1 = 1, prod3 = 1;
    for (std::uint32_t p = 3; p <= P; p += 2) {
        if (spf[p] != p) continue;
        long double x = std::pow((long double)p, -(long double)s);
        if (p % 4 == 1)
            prod1 *= (1 + 6 * x + x * x) * (1 - x) * (1 - x);
        else
            prod3 *= (1 - x * x);
    }
    long double base = (long double)zeta(s) * l_chi(s) * (1 - std::pow(2.0L, -(long double)s)) * prod3;
    long double v = (long double)zeta(s) * base * base * prod1;
    // omitted p≡1 factors are ≤ 1 + 4x; p≡3 factors are < 1
    long double margin = std::exp(4.0L * std::pow((long double)P, 1 - (long double)s) / (s - 1));
    return double(v * margin);
}

double divisor_bound_constant(double e) {
    double c = 1.0;
    double plimit = std::pow(2.0, 1.0 / e);
    for (std::uint64_t p = 2; double(p) < plimit; ++p) {
        bool prime = true;
        for (std::uint64_t f = 2; f * f <= p; ++f)
            if (p % f == 0) prime = false;
        if (!prime) continue;
        double best = 1.0;
        for (int a = 1; a < 200; ++a) best = std::max(best, (a + 1) / std::pow(double(p), a * e));
        c *= best;
    }
    return c;
}

}  // namespace hlat::arith
