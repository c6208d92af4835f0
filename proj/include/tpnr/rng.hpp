#ifndef TPNR_RNG_HPP
#define TPNR_RNG_HPP

#include <cmath>
#include <cstdint>

#include "tpnr/math_util.hpp"

namespace tpnr {

/// Counter-derived random stream. Every pulse gets its own stream from
/// (master seed, pulse index), so results do not depend on how pulses are
/// partitioned across workers.
class PulseRng {
public:
    static PulseRng for_pulse(std::uint64_t master_seed, std::uint64_t pulse_index) {
        // mix seed and index through two splitmix rounds to decorrelate streams
        std::uint64_t s = master_seed;
        std::uint64_t a = splitmix64(s);
        s = a ^ (pulse_index * 0x9e3779b97f4a7c15ULL + 0x632be59bd9b4e019ULL);
        splitmix64(s);
        return PulseRng(s);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return next_double() < p; }

    /// Poisson draw: chop-down inversion for small mean, transformed
    /// rejection (Hormann's PTRS) above.
    long poisson(double mu) {
        if (mu <= 0.0) return 0;
        if (mu < 30.0) return poisson_inversion(mu);
        return poisson_ptrs(mu);
    }

private:
    explicit PulseRng(std::uint64_t state) : state_(state) {}

    long poisson_inversion(double mu) {
        const double emu = std::exp(-mu);
        long k = 0;
        double p = emu;
        double cdf = p;
        const double u = next_double();
        while (u > cdf) {
            ++k;
            p *= mu / static_cast<double>(k);
            cdf += p;
            if (k > 2000) break;  // u in a tail the double-precision cdf cannot reach
        }
        return k;
    }

    long poisson_ptrs(double mu) {
        const double b = 0.931 + 2.53 * std::sqrt(mu);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double lmu = std::log(mu);
        for (;;) {
            const double u = next_double() - 0.5;
            const double v = next_double();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
                kf * lmu - mu - std::lgamma(kf + 1.0))
                return static_cast<long>(kf);
        }
    }

    std::uint64_t state_;
};

}  // namespace tpnr

#endif
