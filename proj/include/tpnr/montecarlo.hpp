#ifndef TPNR_MONTECARLO_HPP
#define TPNR_MONTECARLO_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "tpnr/detector_model.hpp"
#include "tpnr/errors.hpp"
#include "tpnr/estimation.hpp"
#include "tpnr/rng.hpp"

namespace tpnr {

/// Physical detector for simulation: per-bin splitting weights,
/// efficiencies, and dark probabilities. Unlike DetectorConfig this admits
/// heterogeneous bins.
struct SimDetector {
    std::vector<double> weights;
    std::vector<double> etas;
    std::vector<double> p_ds;

    int n() const { return static_cast<int>(weights.size()); }

    void validate() const {
        const std::size_t n_bins = weights.size();
        if (n_bins == 0 || etas.size() != n_bins || p_ds.size() != n_bins)
            throw InvalidConfig("sim detector lists must be nonempty and equally sized");
        double wsum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw InvalidConfig("bin weight must be >= 0");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw InvalidConfig("bin weights must sum to 1 within 1e-12");
        for (double e : etas)
            if (!(e >= 0.0 && e <= 1.0)) throw InvalidConfig("bin eta must lie in [0,1]");
        for (double p : p_ds)
            if (!(p >= 0.0 && p < 1.0)) throw InvalidConfig("bin p_d must lie in [0,1)");
    }
};

/// Input light: a Poissonian pulse of mean mu or a Fock state of m photons.
struct Source {
    enum class Kind { poisson, fock };
    Kind kind = Kind::poisson;
    double mu = 0.0;
    long m = 0;

    static Source poisson(double mu) {
        if (!(mu >= 0.0)) throw InvalidConfig("poisson source needs mu >= 0");
        return {Kind::poisson, mu, 0};
    }
    static Source fock(long m) {
        if (m < 0) throw InvalidConfig("fock source needs m >= 0");
        return {Kind::fock, 0.0, m};
    }
};

struct SimResult {
    std::vector<std::uint64_t> histogram;  // index = click count
    std::uint64_t n_pulses = 0;
    std::uint64_t seed = 0;

    ClickSample to_sample() const {
        ClickSample s;
        s.histogram = histogram;
        s.n_bins = static_cast<int>(histogram.size()) - 1;
        return s;
    }

    ClickPMF empirical_pmf() const {
        ClickPMF pmf;
        pmf.probs.resize(histogram.size());
        for (std::size_t i = 0; i < histogram.size(); ++i)
            pmf.probs[i] = static_cast<double>(histogram[i]) / static_cast<double>(n_pulses);
        return pmf;
    }
};

/// Homogeneous detector matching the closed-form model: uniform splitting,
/// one eta, one p_d.
inline SimDetector uniform_detector(const DetectorConfig& cfg) {
    cfg.validate();
    SimDetector det;
    det.weights.assign(cfg.n, 1.0 / cfg.n);
    det.etas.assign(cfg.n, cfg.eta);
    det.p_ds.assign(cfg.n, cfg.p_d);
    return det;
}

/// Detector with explicit bin weights (e.g. from the multiplexer model)
/// and homogeneous eta / p_d.
inline SimDetector detector_with_weights(const std::vector<double>& weights, double eta,
                                         double p_d) {
    SimDetector det;
    det.weights = weights;
    det.etas.assign(weights.size(), eta);
    det.p_ds.assign(weights.size(), p_d);
    det.validate();
    return det;
}

/// Two SNSPDs with different efficiencies: the first n/2 bins land on one
/// detector, the rest on the other. Splitting stays uniform.
inline SimDetector heterogeneous_two_arm(const DetectorConfig& cfg, double eta_a, double eta_b) {
    cfg.validate();
    if (cfg.n % 2 != 0) throw InvalidConfig("heterogeneous_two_arm requires even n");
    if (!(eta_a >= 0.0 && eta_a <= 1.0) || !(eta_b >= 0.0 && eta_b <= 1.0))
        throw InvalidConfig("arm efficiencies must lie in [0,1]");
    SimDetector det = uniform_detector(cfg);
    for (int i = 0; i < cfg.n; ++i) det.etas[i] = (i < cfg.n / 2) ? eta_a : eta_b;
    return det;
}

namespace detail {

// Above this photon number, switch from per-photon assignment to per-bin
// Bernoulli thinning with click probability 1 - (1 - w_i eta_i)^k.
inline constexpr long kPerPhotonLimit = 10000;

inline int sample_clicks_impl(const SimDetector& det, const Source& source, PulseRng& rng,
                              const std::vector<double>& cum_weights) {
    const int n = det.n();
    const long k = (source.kind == Source::Kind::poisson) ? rng.poisson(source.mu) : source.m;

    int clicks = 0;
    if (k <= kPerPhotonLimit) {
        // per-photon categorical draw, then Bernoulli(eta) detection
        static thread_local std::vector<char> hit;
        hit.assign(n, 0);
        for (long p = 0; p < k; ++p) {
            const double u = rng.next_double();
            const int bin = static_cast<int>(
                std::upper_bound(cum_weights.begin(), cum_weights.end(), u) -
                cum_weights.begin());
            const int b = std::min(bin, n - 1);
            if (!hit[b] && rng.bernoulli(det.etas[b])) hit[b] = 1;
        }
        for (int i = 0; i < n; ++i) {
            const bool dark = det.p_ds[i] > 0.0 && rng.bernoulli(det.p_ds[i]);
            if (hit[i] || dark) ++clicks;
        }
    } else {
        for (int i = 0; i < n; ++i) {
            const double p_click =
                1.0 - std::pow(1.0 - det.weights[i] * det.etas[i], static_cast<double>(k));
            const bool lit = rng.bernoulli(p_click);
            const bool dark = det.p_ds[i] > 0.0 && rng.bernoulli(det.p_ds[i]);
            if (lit || dark) ++clicks;
        }
    }
    return clicks;
}

inline std::vector<double> cumulative_weights(const SimDetector& det) {
    std::vector<double> cum(det.weights.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < det.weights.size(); ++i) {
        acc += det.weights[i];
        cum[i] = acc;
    }
    cum.back() = 1.0;
    return cum;
}

}  // namespace detail

/// One pulse through the chain: photon number draw, bin assignment, loss,
/// dark counts, click counting. Deterministic in (det, source, seed, pulse).
inline int sample_clicks(const SimDetector& det, const Source& source, std::uint64_t seed,
                         std::uint64_t pulse_index = 0) {
    det.validate();
    const auto cum = detail::cumulative_weights(det);
    PulseRng rng = PulseRng::for_pulse(seed, pulse_index);
    return detail::sample_clicks_impl(det, source, rng, cum);
}

/// N pulses; the histogram is independent of thread count because each
/// pulse derives its randomness from (seed, pulse index) alone.
inline SimResult run_experiment(const SimDetector& det, const Source& source,
                                std::uint64_t n_pulses, std::uint64_t seed,
                                unsigned n_threads = 0) {
    det.validate();
    if (n_pulses < 1) throw InvalidConfig("run_experiment requires N >= 1");
    const int n = det.n();
    const auto cum = detail::cumulative_weights(det);

    if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(n_threads, std::max<std::uint64_t>(1, n_pulses / 1024)));

    std::vector<std::vector<std::uint64_t>> partial(
        n_threads, std::vector<std::uint64_t>(n + 1, 0));
    auto worker = [&](unsigned t) {
        auto& hist = partial[t];
        for (std::uint64_t i = t; i < n_pulses; i += n_threads) {
            PulseRng rng = PulseRng::for_pulse(seed, i);
            ++hist[detail::sample_clicks_impl(det, source, rng, cum)];
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    SimResult res;
    res.histogram.assign(n + 1, 0);
    for (const auto& hist : partial)
        for (int x = 0; x <= n; ++x) res.histogram[x] += hist[x];
    res.n_pulses = n_pulses;
    res.seed = seed;
    return res;
}

}  // namespace tpnr

#endif
