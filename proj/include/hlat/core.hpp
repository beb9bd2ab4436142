// Shared plumbing: error classes, 128-bit helpers, exact integer square
// roots, compensated summation and a small deterministic worker pool.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hlat {

using i128 = __int128;
using u128 = unsigned __int128;

// Exit-code classes used by the command line front end:
//   std::invalid_argument / std::domain_error -> 2
//   ResourceError (budget, table size, period overflow) -> 3
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : ResourceError {
    using ResourceError::ResourceError;
};
struct TableTooSmall : ResourceError {
    using ResourceError::ResourceError;
};
struct PeriodOverflow : ResourceError {
    using ResourceError::ResourceError;
};
struct CutoffTooSmall : ResourceError {
    using ResourceError::ResourceError;
};

std::string to_string(u128 v);
std::string to_string(i128 v);

std::uint64_t isqrt(std::uint64_t n);
u128 isqrt(u128 n);
bool is_square(std::uint64_t n, std::uint64_t* root = nullptr);

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        double t = s_ + x;
        if (std::fabs(s_) >= std::fabs(x))
            c_ += (s_ - t) + x;
        else
            c_ += (x - t) + s_;
        s_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

// Global cap on worker threads (0 = hardware concurrency).
void set_thread_limit(unsigned n);
unsigned thread_limit();

// Runs body(i) for i in [0,n). Work is split into fixed contiguous chunks, so
// any per-index output written by body is independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// 2π·frac(y) − π/4 style helpers: phase in cycles reduced to [0,1).
inline double frac(double y) { return y - std::floor(y); }

}  // namespace hlat
