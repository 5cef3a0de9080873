#ifndef MICFLOW_RNG_HPP
#define MICFLOW_RNG_HPP

#include <cmath>
#include <cstdint>

#include "micflow/common.hpp"

namespace micflow {

// xoshiro256** with a splitmix-seeded state. Hand-rolled so that streams are
// stable across standard-library versions; golden outputs depend on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = mix64(s);
            w = s;
        }
        has_gauss_ = false;
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Marsaglia polar method; stable pair-caching Gaussian.
    double gaussian()
    {
        if (has_gauss_) {
            has_gauss_ = false;
            return gauss_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        gauss_ = v * f;
        has_gauss_ = true;
        return u * f;
    }

    double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire rejection-free-ish reduction with a widening multiply.
        const std::uint64_t x = next_u64();
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * n) >> 64);
    }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double gauss_ = 0.0;
    bool has_gauss_ = false;
};

} // namespace micflow

#endif // MICFLOW_RNG_HPP
