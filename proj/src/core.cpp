#include "hlat/core.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace hlat {

std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(char('0' + int(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

std::string to_string(i128 v) {
    if (v < 0) return "-" + to_string(u128(-(v + 1)) + 1);
    return to_string(u128(v));
}

std::uint64_t isqrt(std::uint64_t n) {
    if (n == 0) return 0;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    // the double estimate is within a couple of units; fix it up exactly
    while (r > 0 && (r > 0xFFFFFFFFull || r * r > n)) --r;
    while (r + 1 <= 0xFFFFFFFFull && (r + 1) * (r + 1) <= n) ++r;
    return r;
}

u128 isqrt(u128 n) {
    if (n <= u128(UINT64_MAX)) return isqrt(static_cast<std::uint64_t>(n));
    auto r = static_cast<u128>(std::sqrt(static_cast<long double>(n)));
    // Newton steps from the long double guess, then exact correction
    for (int it = 0; it < 4; ++it) {
        if (r == 0) break;
        u128 nr = (r + n / r) / 2;
        if (nr == r) break;
        r = nr;
    }
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

bool is_square(std::uint64_t n, std::uint64_t* root) {
    std::uint64_t r = isqrt(n);
    if (root) *root = r;
    return r * r == n;
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) {
        std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 32) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_limit(unsigned n) { g_threads = n; }

unsigned thread_limit() {
    unsigned n = g_threads.load();
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned nt = std::min<std::size_t>(thread_limit(), n);
    if (nt <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace hlat
