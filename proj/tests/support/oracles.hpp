#ifndef TPNR_TESTS_ORACLES_HPP
#define TPNR_TESTS_ORACLES_HPP

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tpnr/detector_model.hpp"

namespace tpnr::test {

/// Brute-force Fock click PMF: enumerate all n^m equiprobable photon
/// placements; for each placement the bins click independently with
/// probability 1 - (1 - eta)^{k_i} (1 - p_d), and the click-count law
/// follows from the Poisson-binomial recursion. Independent of the
/// alternating-series implementation under test.
inline std::vector<double> fock_pmf_enumeration(int n, double eta, double p_d, int m) {
    std::vector<double> pmf(n + 1, 0.0);
    std::vector<int> placement(m, 0);
    const double weight = std::pow(1.0 / n, m);
    for (;;) {
        std::vector<int> occupancy(n, 0);
        for (int p = 0; p < m; ++p) ++occupancy[placement[p]];
        // Poisson-binomial over per-bin click probabilities
        std::vector<double> dist(1, 1.0);
        for (int i = 0; i < n; ++i) {
            const double c = 1.0 - std::pow(1.0 - eta, occupancy[i]) * (1.0 - p_d);
            std::vector<double> next(dist.size() + 1, 0.0);
            for (std::size_t x = 0; x < dist.size(); ++x) {
                next[x] += dist[x] * (1.0 - c);
                next[x + 1] += dist[x] * c;
            }
            dist = std::move(next);
        }
        for (int x = 0; x <= n; ++x) pmf[x] += weight * dist[x];
        // next placement in lexicographic order
        int p = 0;
        while (p < m && ++placement[p] == n) placement[p++] = 0;
        if (p == m && m > 0) break;
        if (m == 0) break;
    }
    return pmf;
}

/// Pearson chi-square goodness of fit of a histogram against a model PMF.
/// Bins with expected count below `min_expected` are pooled into the
/// running neighbor. Returns the p-value.
inline double chi_square_gof_pvalue(const std::vector<std::uint64_t>& histogram,
                                    const std::vector<double>& pmf, std::uint64_t n_samples,
                                    double min_expected = 5.0) {
    double stat = 0.0;
    int cells = 0;
    double pooled_obs = 0.0, pooled_exp = 0.0;
    for (std::size_t x = 0; x < histogram.size(); ++x) {
        pooled_obs += static_cast<double>(histogram[x]);
        pooled_exp += pmf[x] * static_cast<double>(n_samples);
        if (pooled_exp >= min_expected) {
            const double d = pooled_obs - pooled_exp;
            stat += d * d / pooled_exp;
            ++cells;
            pooled_obs = pooled_exp = 0.0;
        }
    }
    if (pooled_exp > 0.0) {
        // fold the final remainder into the last cell
        const double d = pooled_obs - pooled_exp;
        stat += d * d / pooled_exp;
        ++cells;
    }
    const int dof = cells - 1;
    if (dof < 1) return 1.0;
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

inline double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

inline double poisson_pmf(double mu, long k) {
    if (mu == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
}

}  // namespace tpnr::test

#endif
