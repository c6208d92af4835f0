#ifndef TPNR_MATH_UTIL_HPP
#define TPNR_MATH_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace tpnr {

/// ln C(n, k) via lgamma; exact to double rounding for the sizes used here.
inline double log_binomial(int n, int k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// C(n, k) in long double, computed multiplicatively.
inline long double binomial_ld(int n, int k) {
    if (k < 0 || k > n) return 0.0L;
    if (k > n - k) k = n - k;
    long double r = 1.0L;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Kahan compensated accumulator.
template <typename T = long double>
class KahanSum {
public:
    void add(T x) {
        T y = x - comp_;
        T t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    T value() const { return sum_; }

private:
    T sum_ = 0;
    T comp_ = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace tpnr

#endif
