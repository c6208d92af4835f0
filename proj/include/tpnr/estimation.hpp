#ifndef TPNR_ESTIMATION_HPP
#define TPNR_ESTIMATION_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "tpnr/detector_model.hpp"
#include "tpnr/errors.hpp"

namespace tpnr {

/// Per-pulse click counts from N pulses, stored as a histogram over {0..n}.
struct ClickSample {
    std::vector<std::uint64_t> histogram;  // histogram[x] = pulses with x clicks
    int n_bins = 0;

    static ClickSample from_counts(const std::vector<int>& counts, int n_bins) {
        ClickSample s;
        s.n_bins = n_bins;
        s.histogram.assign(n_bins + 1, 0);
        for (int x : counts) {
            if (x < 0 || x > n_bins)
                throw InvalidConfig("click count " + std::to_string(x) + " outside {0.." +
                                    std::to_string(n_bins) + "}");
            ++s.histogram[x];
        }
        return s;
    }

    std::uint64_t pulses() const {
        std::uint64_t n = 0;
        for (auto c : histogram) n += c;
        return n;
    }

    void validate() const {
        if (n_bins < 1 || histogram.size() != static_cast<std::size_t>(n_bins) + 1)
            throw InvalidConfig("click sample histogram must have n_bins + 1 entries");
        if (pulses() == 0) throw InvalidConfig("click sample is empty");
    }
};

/// <x> = (1/N) sum x_i.
inline double sample_mean(const ClickSample& sample) {
    sample.validate();
    double sum = 0.0;
    for (std::size_t x = 0; x < sample.histogram.size(); ++x)
        sum += static_cast<double>(x) * static_cast<double>(sample.histogram[x]);
    return sum / static_cast<double>(sample.pulses());
}

/// Unbiased sample standard deviation of the click counts (divisor N-1).
inline double sample_click_std(const ClickSample& sample) {
    sample.validate();
    const std::uint64_t n_pulses = sample.pulses();
    if (n_pulses < 2) throw InvalidConfig("sample standard deviation needs N >= 2");
    const double mean = sample_mean(sample);
    double ss = 0.0;
    for (std::size_t x = 0; x < sample.histogram.size(); ++x) {
        const double d = static_cast<double>(x) - mean;
        ss += d * d * static_cast<double>(sample.histogram[x]);
    }
    return std::sqrt(ss / static_cast<double>(n_pulses - 1));
}

/// Maximum-likelihood estimate of mu from a mean click count,
/// mu = -(n/eta) ln((n - <x>) / ((1 - p_d) n)).
/// Negative values (possible when p_d > 0 and <x> is tiny) are NOT clamped
/// here; see mle_mu.
inline double mle_mu_from_mean(const DetectorConfig& cfg, double mean_clicks) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("mle requires eta > 0");
    if (mean_clicks >= cfg.n)
        throw SaturatedSample("mean click count " + std::to_string(mean_clicks) +
                              " has saturated the n=" + std::to_string(cfg.n) + " array");
    if (mean_clicks < 0.0) throw InvalidConfig("mean click count must be >= 0");
    return -(cfg.n / cfg.eta) * std::log((cfg.n - mean_clicks) / ((1.0 - cfg.p_d) * cfg.n));
}

/// Cramer-Rao lower bound on Var(mu_hat) for N pulses at true mean mu.
inline double cramer_rao_bound(const DetectorConfig& cfg, double mu, std::uint64_t n_pulses) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("cramer_rao_bound requires eta > 0");
    if (n_pulses < 1) throw InvalidConfig("cramer_rao_bound requires N >= 1");
    if (!(mu >= 0.0)) throw InvalidConfig("mu must be >= 0");
    const double g = std::exp(mu * cfg.eta / cfg.n) / (1.0 - cfg.p_d) - 1.0;
    return cfg.n * g / (cfg.eta * cfg.eta * static_cast<double>(n_pulses));
}

/// Statistical error of the MLE from the propagated sample variance:
/// (n / (eta (n - <x>))) s_x / sqrt(N).
inline double delta_method_std(const DetectorConfig& cfg, const ClickSample& sample) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("delta_method_std requires eta > 0");
    const double mean = sample_mean(sample);
    if (mean >= cfg.n) throw SaturatedSample("saturated sample: <x> = n");
    const double s_x = sample_click_std(sample);
    return (cfg.n / (cfg.eta * (cfg.n - mean))) * s_x /
           std::sqrt(static_cast<double>(sample.pulses()));
}

/// Spacing between the estimate at <x> and the next representable value
/// <x> + 1/N. Diverges as <x> -> n.
inline double resolution_spacing(const DetectorConfig& cfg, double mean_clicks,
                                 std::uint64_t n_pulses) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("resolution_spacing requires eta > 0");
    if (n_pulses < 1) throw InvalidConfig("resolution_spacing requires N >= 1");
    const double step = 1.0 / static_cast<double>(n_pulses);
    if (!(mean_clicks >= 0.0) || mean_clicks >= cfg.n - step)
        throw InvalidConfig("resolution_spacing: <x> must lie in [0, n - 1/N)");
    return -(cfg.n / cfg.eta) * std::log((cfg.n - mean_clicks - step) / (cfg.n - mean_clicks));
}

/// Largest mu with a finite estimate and finite resolution error,
/// mu_hat(n - 2/N) = (n/eta) ln(n N (1 - p_d) / 2).
inline double max_resolvable_mu(const DetectorConfig& cfg, std::uint64_t n_pulses) {
    cfg.validate();
    if (cfg.eta <= 0.0) throw InvalidConfig("max_resolvable_mu requires eta > 0");
    if (n_pulses < 1) throw InvalidConfig("max_resolvable_mu requires N >= 1");
    return (cfg.n / cfg.eta) *
           std::log(cfg.n * static_cast<double>(n_pulses) * (1.0 - cfg.p_d) / 2.0);
}

/// MLE of the mean photon number with its error budget.
struct MuEstimate {
    double mu_hat = 0.0;
    double std_dev = 0.0;      // delta-method statistical std
    double resolution = 0.0;   // spacing to the next representable estimate
    double mean_clicks = 0.0;
    bool clamped = false;      // raw estimate was negative and clamped to 0
};

inline MuEstimate mle_mu(const DetectorConfig& cfg, const ClickSample& sample) {
    cfg.validate();
    sample.validate();
    if (sample.n_bins != cfg.n)
        throw InvalidConfig("sample n_bins " + std::to_string(sample.n_bins) +
                            " does not match detector n " + std::to_string(cfg.n));
    MuEstimate est;
    est.mean_clicks = sample_mean(sample);
    const double raw = mle_mu_from_mean(cfg, est.mean_clicks);
    if (raw < 0.0) {
        // <x> below the dark-count floor; ordinary fluctuation, not an error
        est.mu_hat = 0.0;
        est.clamped = true;
    } else {
        est.mu_hat = raw;
    }
    const std::uint64_t n_pulses = sample.pulses();
    est.std_dev = (n_pulses >= 2) ? delta_method_std(cfg, sample) : 0.0;
    est.resolution = (est.mean_clicks < cfg.n - 1.0 / static_cast<double>(n_pulses))
                         ? resolution_spacing(cfg, est.mean_clicks, n_pulses)
                         : std::numeric_limits<double>::infinity();
    return est;
}

/// Least-squares fit of log10(mu_hat) = log10(amplitude) - decade_slope * od.
struct AttenuationFit {
    double amplitude = 0.0;
    double decade_slope = 0.0;
    std::vector<double> residuals;  // in log10 space
};

inline AttenuationFit attenuation_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw InvalidConfig("attenuation_fit needs at least 2 points");
    std::vector<double> od(points.size()), y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!(points[i].second > 0.0))
            throw InvalidConfig("attenuation_fit: mu_hat must be positive");
        od[i] = points[i].first;
        y[i] = std::log10(points[i].second);
    }
    const double n = static_cast<double>(points.size());
    double s_od = 0.0, s_y = 0.0, s_oo = 0.0, s_oy = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        s_od += od[i];
        s_y += y[i];
        s_oo += od[i] * od[i];
        s_oy += od[i] * y[i];
    }
    const double det = n * s_oo - s_od * s_od;
    if (std::abs(det) < 1e-12 * std::max(1.0, n * s_oo))
        throw InvalidConfig("attenuation_fit: OD values are degenerate");
    const double slope = (n * s_oy - s_od * s_y) / det;  // d y / d od
    const double intercept = (s_y - slope * s_od) / n;
    AttenuationFit fit;
    fit.decade_slope = -slope;
    fit.amplitude = std::pow(10.0, intercept);
    fit.residuals.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        fit.residuals[i] = y[i] - (intercept + slope * od[i]);
    return fit;
}

/// Single-shot Fock classification: each click count x is read out as the
/// photon-number verdict m_hat(x) = min(x, m_max), and success_probs[m] is
/// the probability that an m-photon input is classified as m.
///
/// max_resolvable is the largest M with success_probs[m] >= 1/2 for every
/// m <= M. The threshold carries a 1e-3 grace band: the lossless 16-bin
/// array sits exactly at Pr(5|5) = 0.49995, which counts as the 50% mark.
struct FockClassification {
    std::vector<int> decision_map;       // index x -> m_hat
    std::vector<double> success_probs;   // index m in {0..m_max}
    int max_resolvable = 0;
};

inline constexpr double kClassifySuccessThreshold = 0.5 - 1e-3;

inline FockClassification fock_classify(const DetectorConfig& cfg, int m_max) {
    cfg.validate();
    if (m_max < 0 || m_max > 50) throw InvalidConfig("m_max must lie in [0, 50]");
    FockClassification out;
    out.decision_map.resize(cfg.n + 1);
    for (int x = 0; x <= cfg.n; ++x) out.decision_map[x] = std::min(x, m_max);
    out.success_probs.assign(m_max + 1, 0.0);
    for (int m = 0; m <= m_max; ++m) {
        const ClickPMF pmf = click_pmf_fock(cfg, m);
        double p = 0.0;
        for (int x = 0; x <= cfg.n; ++x)
            if (out.decision_map[x] == m) p += pmf.probs[x];
        out.success_probs[m] = p;
    }
    out.max_resolvable = -1;
    for (int m = 0; m <= m_max; ++m) {
        if (out.success_probs[m] >= kClassifySuccessThreshold)
            out.max_resolvable = m;
        else
            break;
    }
    return out;  // stays -1 if even m = 0 fails (heavy dark counts)
}

inline FockClassification fock_classify(const DetectorConfig& cfg) {
    return fock_classify(cfg, std::min(2 * cfg.n, 50));
}

}  // namespace tpnr

#endif
