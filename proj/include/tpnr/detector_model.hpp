#ifndef TPNR_DETECTOR_MODEL_HPP
#define TPNR_DETECTOR_MODEL_HPP

#include <cmath>
#include <string>
#include <vector>

#include "tpnr/errors.hpp"
#include "tpnr/math_util.hpp"

namespace tpnr {

/// Parameters of an n-element multiplexed click detector: array size,
/// overall quantum efficiency, and dark-count probability per time-bin.
struct DetectorConfig {
    int n = 16;
    double eta = 1.0;
    double p_d = 0.0;

    void validate() const {
        if (n < 1) throw InvalidConfig("array size n must be >= 1, got " + std::to_string(n));
        if (!(eta >= 0.0 && eta <= 1.0))
            throw InvalidConfig("eta must lie in [0,1], got " + std::to_string(eta));
        if (!(p_d >= 0.0 && p_d < 1.0))
            throw InvalidConfig("p_d must lie in [0,1), got " + std::to_string(p_d));
    }
};

/// Probability mass over click counts x in {0,...,n}.
struct ClickPMF {
    std::vector<double> probs;

    int n() const { return static_cast<int>(probs.size()) - 1; }

    double total_variation(const ClickPMF& other) const {
        double s = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i)
            s += std::abs(probs[i] - other.probs[i]);
        return 0.5 * s;
    }
};

/// Per-bin click probability q = 1 - (1 - p_d) exp(-mu eta / n).
inline double bin_click_probability(const DetectorConfig& cfg, double mu) {
    return 1.0 - (1.0 - cfg.p_d) * std::exp(-mu * cfg.eta / cfg.n);
}

namespace detail {

// Binomial(n, q) evaluated through log-domain coefficients; the product
// form of the click distribution overflows once mu*eta >> n.
inline ClickPMF binomial_pmf(int n, double q) {
    ClickPMF pmf;
    pmf.probs.assign(n + 1, 0.0);
    if (q <= 0.0) {
        pmf.probs[0] = 1.0;
        return pmf;
    }
    if (q >= 1.0) {
        pmf.probs[n] = 1.0;
        return pmf;
    }
    const double lq = std::log(q);
    const double l1mq = std::log1p(-q);
    for (int x = 0; x <= n; ++x)
        pmf.probs[x] = std::exp(log_binomial(n, x) + x * lq + (n - x) * l1mq);
    return pmf;
}

}  // namespace detail

/// Click distribution for a Poissonian pulse of mean photon number mu.
/// Equals Binomial(n, q) with q = 1 - (1-p_d) exp(-mu eta / n).
inline ClickPMF click_pmf_poisson(const DetectorConfig& cfg, double mu) {
    cfg.validate();
    if (!(mu >= 0.0)) throw InvalidConfig("mu must be >= 0, got " + std::to_string(mu));
    return detail::binomial_pmf(cfg.n, bin_click_probability(cfg, mu));
}

/// Click distribution for a Fock input of exactly m photons.
///
/// The alternating inclusion-exclusion series is accumulated with
/// compensated summation in long double; small negative excursions from
/// cancellation are clamped to zero.
inline ClickPMF click_pmf_fock(const DetectorConfig& cfg, long m) {
    cfg.validate();
    if (m < 0) throw InvalidConfig("photon number m must be >= 0");
    const int n = cfg.n;
    ClickPMF pmf;
    pmf.probs.assign(n + 1, 0.0);
    for (int x = 0; x <= n; ++x) {
        KahanSum<long double> acc;
        for (int l = 0; l <= x; ++l) {
            const int k = n - x + l;
            // ((n - k*eta)/n)^m keeps every factor in [0,1]
            long double term = binomial_ld(x, l) *
                               std::pow(static_cast<long double>(1.0 - cfg.p_d), k) *
                               std::pow((n - k * static_cast<long double>(cfg.eta)) / n,
                                        static_cast<long double>(m));
            acc.add((l % 2 == 0) ? term : -term);
        }
        long double p = binomial_ld(n, x) * acc.value();
        if (p < 0.0L) {
            if (p < -1e-9L)
                throw std::runtime_error("fock pmf: cancellation beyond tolerance at x=" +
                                         std::to_string(x));
            p = 0.0L;
        }
        if (p > 1.0L) p = 1.0L;
        pmf.probs[x] = static_cast<double>(p);
    }
    return pmf;
}

struct ClickMoments {
    double mean;
    double variance;
};

/// Mean and variance of the Poissonian click distribution, n q and n q (1-q).
inline ClickMoments click_moments(const DetectorConfig& cfg, double mu) {
    cfg.validate();
    if (!(mu >= 0.0)) throw InvalidConfig("mu must be >= 0");
    const double q = bin_click_probability(cfg, mu);
    return {cfg.n * q, cfg.n * q * (1.0 - q)};
}

/// Mean photon number at which Var(x) peaks: mu = n ln 2 / eta.
/// The closed form holds for negligible dark counts, so p_d must be zero.
inline double variance_maximizing_mu(const DetectorConfig& cfg) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("variance_maximizing_mu requires eta > 0");
    if (cfg.p_d != 0.0) throw InvalidConfig("variance_maximizing_mu requires p_d = 0");
    return cfg.n * std::log(2.0) / cfg.eta;
}

}  // namespace tpnr

#endif
