#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "tpnr/estimation.hpp"
#include "tpnr/montecarlo.hpp"
#include "tpnr/multiplexer.hpp"

using namespace tpnr;

TEST_CASE("uniform detector layout") {
    const auto det = uniform_detector({2, 1.0, 0.0});
    CHECK(det.weights == std::vector<double>{0.5, 0.5});
    CHECK(det.etas == std::vector<double>{1.0, 1.0});
    CHECK(det.p_ds == std::vector<double>{0.0, 0.0});

    const auto det16 = uniform_detector({16, 0.49, 0.0});
    for (double w : det16.weights) CHECK(w == Catch::Approx(1.0 / 16.0));
}

TEST_CASE("multiplexer weights at zero offset equal the uniform detector") {
    const auto bw = bin_weights(MultiplexerSpec::defaults(), 0.0);
    const auto det = detector_with_weights(bw.fractions, 0.49, 0.0);
    const auto uni = uniform_detector({16, 0.49, 0.0});
    for (int i = 0; i < 16; ++i)
        CHECK(det.weights[i] == Catch::Approx(uni.weights[i]).margin(1e-15));
}

TEST_CASE("detector validation") {
    SimDetector bad;
    bad.weights = {0.6, 0.6};
    bad.etas = {1.0, 1.0};
    bad.p_ds = {0.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), InvalidConfig);
    CHECK_THROWS_AS(heterogeneous_two_arm({15, 0.5, 0.0}, 0.5, 0.6), InvalidConfig);
}

TEST_CASE("degenerate sources") {
    const auto det = uniform_detector({16, 0.49, 0.0});
    for (std::uint64_t i = 0; i < 100; ++i)
        CHECK(sample_clicks(det, Source::fock(0), 1, i) == 0);

    const auto unit = uniform_detector({1, 1.0, 0.0});
    for (std::uint64_t i = 0; i < 100; ++i)
        CHECK(sample_clicks(unit, Source::fock(1), 1, i) == 1);
}

TEST_CASE("same seed gives identical histograms, any thread count") {
    const auto det = uniform_detector({16, 0.49, 0.0});
    const auto a = run_experiment(det, Source::poisson(5.0), 50000, 77, 1);
    const auto b = run_experiment(det, Source::poisson(5.0), 50000, 77, 4);
    const auto c = run_experiment(det, Source::poisson(5.0), 50000, 77, 3);
    CHECK(a.histogram == b.histogram);
    CHECK(a.histogram == c.histogram);
    const auto d = run_experiment(det, Source::poisson(5.0), 50000, 78, 1);
    CHECK(a.histogram != d.histogram);
}

TEST_CASE("N = 1 reduces to a single draw") {
    const auto det = uniform_detector({16, 0.49, 0.0});
    const auto res = run_experiment(det, Source::poisson(3.0), 1, 123);
    CHECK(res.n_pulses == 1);
    std::uint64_t total = 0;
    for (auto c : res.histogram) total += c;
    CHECK(total == 1);
    const int x = sample_clicks(det, Source::poisson(3.0), 123, 0);
    CHECK(res.histogram[x] == 1);
}

TEST_CASE("empirical pmf matches the analytic law (chi-square + TV)") {
    const DetectorConfig cfg{16, 0.49, 0.0};
    const auto det = uniform_detector(cfg);
    for (const double mu : {0.5, 5.0, 10.0}) {
        const auto res = run_experiment(det, Source::poisson(mu), 1000000, 31 + (int)(10 * mu));
        const auto analytic = click_pmf_poisson(cfg, mu);
        CHECK(test::tv_distance(res.empirical_pmf().probs, analytic.probs) < 0.005);
        CHECK(test::chi_square_gof_pvalue(res.histogram, analytic.probs, res.n_pulses) > 1e-3);
    }
}

TEST_CASE("empirical pmf matches the analytic law with dark counts") {
    const DetectorConfig cfg{16, 0.49, 0.01};
    const auto det = uniform_detector(cfg);
    const auto res = run_experiment(det, Source::poisson(2.0), 1000000, 501);
    const auto analytic = click_pmf_poisson(cfg, 2.0);
    CHECK(test::tv_distance(res.empirical_pmf().probs, analytic.probs) < 0.005);
    CHECK(test::chi_square_gof_pvalue(res.histogram, analytic.probs, res.n_pulses) > 1e-3);
}

TEST_CASE("fock sampling matches the analytic fock pmf") {
    for (const int n : {2, 4, 6}) {
        for (const int m : {1, 3, 6}) {
            const DetectorConfig cfg{n, 0.7, 0.0};
            const auto det = uniform_detector(cfg);
            const auto res = run_experiment(det, Source::fock(m), 100000, 1000 + n * 10 + m);
            const auto analytic = click_pmf_fock(cfg, m);
            CHECK(test::tv_distance(res.empirical_pmf().probs, analytic.probs) < 0.01);
        }
    }
}

TEST_CASE("large-photon-number thinning path stays consistent") {
    // mu high enough that pulses cross the per-photon/thinning boundary
    const DetectorConfig cfg{16, 0.49, 0.0};
    const auto det = uniform_detector(cfg);
    const double mu = 150.0;
    const auto res = run_experiment(det, Source::poisson(mu), 200000, 9001);
    const auto analytic = click_pmf_poisson(cfg, mu);
    CHECK(test::tv_distance(res.empirical_pmf().probs, analytic.probs) < 0.01);
}

TEST_CASE("support: clicks bounded by photons when dark-free") {
    const auto det = uniform_detector({16, 1.0, 0.0});
    for (std::uint64_t i = 0; i < 500; ++i) {
        const int x = sample_clicks(det, Source::fock(3), 17, i);
        CHECK(x >= 0);
        CHECK(x <= 3);
    }
}

TEST_CASE("weights concentrated on one bin give at most one click") {
    SimDetector det;
    det.weights = {1.0, 0.0, 0.0, 0.0};
    det.etas = {0.8, 0.8, 0.8, 0.8};
    det.p_ds = {0.0, 0.0, 0.0, 0.0};
    for (std::uint64_t i = 0; i < 500; ++i) {
        const int x = sample_clicks(det, Source::poisson(10.0), 3, i);
        CHECK((x == 0 || x == 1));
    }
}

TEST_CASE("estimation round-trip on simulated data") {
    const DetectorConfig cfg{16, 0.49, 0.0};
    const auto det = uniform_detector(cfg);
    for (const double mu : {5.0, 20.0}) {
        const auto res = run_experiment(det, Source::poisson(mu), 1000000, 4242);
        const auto est = mle_mu(cfg, res.to_sample());
        const double sigma = std::sqrt(cramer_rao_bound(cfg, mu, res.n_pulses));
        CHECK(std::abs(est.mu_hat - mu) <= 3.0 * sigma);
    }
}

TEST_CASE("two-arm detector: layout and mean efficiency") {
    const auto det = heterogeneous_two_arm({16, 0.49, 0.0}, 0.50, 0.64);
    double mean_eta = 0.0;
    for (int i = 0; i < 16; ++i) {
        CHECK(det.etas[i] == (i < 8 ? 0.50 : 0.64));
        mean_eta += det.etas[i];
    }
    CHECK(mean_eta / 16.0 == Catch::Approx(0.57));

    const auto same = heterogeneous_two_arm({16, 0.49, 0.0}, 0.49, 0.49);
    const auto uni = uniform_detector({16, 0.49, 0.0});
    CHECK(same.etas == uni.etas);
    CHECK(same.weights == uni.weights);
}

TEST_CASE("two-arm deviation from the homogeneous law peaks near n ln2 / eta") {
    // exploratory check: the mismatch against the mean-efficiency model is
    // larger at the variance-maximizing mu than deep in the weak-light regime
    const double eta_bar = 0.57;
    const DetectorConfig mean_cfg{16, eta_bar, 0.0};
    const auto det = heterogeneous_two_arm({16, 0.0, 0.0}, 0.50, 0.64);
    const double mu_peak = 16.0 * std::log(2.0) / eta_bar;
    const double mu_low = 0.1 * mu_peak;

    const auto at_peak = run_experiment(det, Source::poisson(mu_peak), 1000000, 606);
    const auto at_low = run_experiment(det, Source::poisson(mu_low), 1000000, 607);
    const double tv_peak =
        test::tv_distance(at_peak.empirical_pmf().probs, click_pmf_poisson(mean_cfg, mu_peak).probs);
    const double tv_low =
        test::tv_distance(at_low.empirical_pmf().probs, click_pmf_poisson(mean_cfg, mu_low).probs);
    INFO("TV at variance peak " << tv_peak << ", TV at low mu " << tv_low);
    CHECK(tv_peak > tv_low);
}
