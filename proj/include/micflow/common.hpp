#ifndef MICFLOW_COMMON_HPP
#define MICFLOW_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace micflow {

// x * log2(x), with the 0 * log 0 := 0 convention used by all entropy sums.
inline double plog2(double x)
{
    return x > 0.0 ? x * std::log2(x) : 0.0;
}

// log2 via atanh series on the mantissa. Exact at powers of two, relative
// error below 1e-13 elsewhere; branch-free enough for the compiler to
// vectorize the population-module inner loops where std::log2 is the
// bottleneck.
inline double fast_log2(double x)
{
    static constexpr double kInvLn2 = 1.4426950408889634073599246810019;
    static constexpr double kSqrt2 = 1.4142135623730950488016887242097;

    int e = 0;
    double m = std::frexp(x, &e); // m in [0.5, 1)
    m *= 2.0;
    e -= 1;
    if (m >= kSqrt2) {
        m *= 0.5;
        e += 1;
    }
    const double t = (m - 1.0) / (m + 1.0);
    const double t2 = t * t;
    // atanh(t) = t + t^3/3 + ... ; |t| <= (sqrt(2)-1)/(sqrt(2)+1) ~ 0.1716
    const double s = t * (1.0 + t2 * (1.0 / 3.0 + t2 * (1.0 / 5.0 + t2 * (1.0 / 7.0 + t2 * (1.0 / 9.0 + t2 * (1.0 / 11.0 + t2 * (1.0 / 13.0)))))));
    return static_cast<double>(e) + 2.0 * kInvLn2 * s;
}

inline double fast_plog2(double x)
{
    return x > 0.0 ? x * fast_log2(x) : 0.0;
}

inline bool all_finite(const std::vector<double>& v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Raw information values are carried in bits internally; InfoConfig rescales
// on the way out. Normalized scores never depend on the base.
struct InfoConfig {
    double log_base = 2.0;

    InfoConfig() = default;
    explicit InfoConfig(double base)
        : log_base(base)
    {
        if (!(base > 1.0))
            throw std::invalid_argument("InfoConfig: log base must exceed 1");
    }

    double from_bits(double bits) const { return bits / std::log2(log_base); }
};

// splitmix64; used to derive independent per-replicate seeds from
// (master seed, index...) so results do not depend on scheduling.
inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0)
{
    return mix64(mix64(master ^ mix64(a)) ^ mix64(b ^ 0xa5a5a5a5a5a5a5a5ULL));
}

} // namespace micflow

#endif // MICFLOW_COMMON_HPP
