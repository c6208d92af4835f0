// tpnr: temporal-array photon-number-resolving detector toolkit.
//
// Subcommands: simulate, estimate, sweep, classify, bandwidth, ingest.
// Every command echoes its effective parameters into a JSON summary and is
// deterministic given config + seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpnr/tpnr.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace tpnr;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitDegenerate = 4;

struct RunConfig {
    DetectorConfig detector{16, 0.49, 0.0};
    std::optional<std::pair<double, double>> two_arm_etas;  // heterogeneous simulation
    MultiplexerSpec multiplexer = MultiplexerSpec::defaults();
    Source source = Source::poisson(5.0);
    std::uint64_t n_pulses = 1000000;
    std::uint64_t seed = 1;
    TriggerConfig trigger = TriggerConfig::defaults();
};

RunConfig load_config(const std::string& path) {
    RunConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file " + path);
    json j = json::parse(in);
    if (j.contains("detector")) {
        const auto& d = j["detector"];
        cfg.detector.n = d.value("n", cfg.detector.n);
        cfg.detector.eta = d.value("eta", cfg.detector.eta);
        cfg.detector.p_d = d.value("p_d", cfg.detector.p_d);
    }
    if (j.contains("two_arm_etas")) {
        const auto& t = j["two_arm_etas"];
        cfg.two_arm_etas = {t.at(0).get<double>(), t.at(1).get<double>()};
    }
    if (j.contains("multiplexer")) {
        const auto& m = j["multiplexer"];
        auto& spec = cfg.multiplexer;
        spec.stages = m.value("stages", spec.stages);
        if (m.contains("loop_delays_ns"))
            spec.loop_delays_ns = m["loop_delays_ns"].get<std::vector<double>>();
        spec.fiber_loss_db_per_km = m.value("fiber_loss_db_per_km", spec.fiber_loss_db_per_km);
        spec.avg_path_m = m.value("avg_path_m", spec.avg_path_m);
        if (m.contains("coupler")) {
            spec.coupler.slope_a = m["coupler"].value("slope_a", spec.coupler.slope_a);
            spec.coupler.excess_loss_db =
                m["coupler"].value("excess_loss_db", spec.coupler.excess_loss_db);
        }
        spec.routing = MultiplexerSpec::default_routing(spec.stages);
        spec.validate();
    }
    if (j.contains("source")) {
        const auto& s = j["source"];
        const std::string kind = s.value("kind", "poisson");
        if (kind == "poisson")
            cfg.source = Source::poisson(s.value("mu", 5.0));
        else if (kind == "fock")
            cfg.source = Source::fock(s.value("m", 1));
        else
            throw InvalidConfig("unknown source kind " + kind);
    }
    cfg.n_pulses = j.value("n_pulses", cfg.n_pulses);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("trigger")) {
        const auto& t = j["trigger"];
        cfg.trigger.period_ns = t.value("period_ns", cfg.trigger.period_ns);
        const double window = t.value("window_ns", cfg.trigger.window_ns);
        const double base = t.value("base_offset_ns", 50.0);
        cfg.trigger = TriggerConfig::from_schedule(cfg.multiplexer, base, window);
        cfg.trigger.period_ns = t.value("period_ns", 10000.0);
    }
    cfg.detector.validate();
    return cfg;
}

json detector_json(const DetectorConfig& d) {
    return json{{"n", d.n}, {"eta", d.eta}, {"p_d", d.p_d}};
}

json source_json(const Source& s) {
    if (s.kind == Source::Kind::poisson) return json{{"kind", "poisson"}, {"mu", s.mu}};
    return json{{"kind", "fock"}, {"m", s.m}};
}

json estimate_json(const DetectorConfig& cfg, const ClickSample& sample) {
    const MuEstimate est = mle_mu(cfg, sample);
    return json{{"mu_hat", est.mu_hat},
                {"std", est.std_dev},
                {"crb_floor", std::sqrt(cramer_rao_bound(cfg, est.mu_hat, sample.pulses()))},
                {"resolution", std::isfinite(est.resolution) ? json(est.resolution) : json()},
                {"mean_clicks", est.mean_clicks},
                {"n_pulses", sample.pulses()},
                {"clamped", est.clamped}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::ios_base::failure("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

SimDetector build_sim_detector(const RunConfig& cfg) {
    if (cfg.two_arm_etas)
        return heterogeneous_two_arm(cfg.detector, cfg.two_arm_etas->first,
                                     cfg.two_arm_etas->second);
    return uniform_detector(cfg.detector);
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out_dir) {
    const SimDetector det = build_sim_detector(cfg);
    const SimResult res = run_experiment(det, cfg.source, cfg.n_pulses, cfg.seed);

    std::ostringstream hist_csv;
    write_histogram(hist_csv, res);
    write_text(out_dir / "histogram.csv", hist_csv.str());

    json summary{{"command", "simulate"},
                 {"detector", detector_json(cfg.detector)},
                 {"source", source_json(cfg.source)},
                 {"n_pulses", cfg.n_pulses},
                 {"seed", cfg.seed}};
    if (cfg.two_arm_etas)
        summary["two_arm_etas"] = {cfg.two_arm_etas->first, cfg.two_arm_etas->second};
    const ClickSample sample = res.to_sample();
    if (sample_mean(sample) < cfg.detector.n)
        summary["estimate"] = estimate_json(cfg.detector, sample);
    else
        summary["estimate"] = nullptr;
    write_json(out_dir / "summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::string& sample_path, const fs::path& out_dir) {
    std::ifstream in(sample_path);
    if (!in) throw std::ios_base::failure("cannot open sample file " + sample_path);
    const ClickSample sample = read_click_sample(in, cfg.detector.n);
    const json est = estimate_json(cfg.detector, sample);
    json summary{{"command", "estimate"},
                 {"detector", detector_json(cfg.detector)},
                 {"sample_file", sample_path},
                 {"estimate", est}};
    write_json(out_dir / "estimate.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& ods, double mu0,
              const fs::path& out_dir) {
    if (!(mu0 > 0.0)) throw InvalidConfig("--mu0 must be > 0");
    if (ods.empty()) throw InvalidConfig("--od-list must not be empty");
    const double od_min = *std::min_element(ods.begin(), ods.end());
    const SimDetector det = build_sim_detector(cfg);

    std::ostringstream csv;
    csv << "od,mu_true,mu_hat,std,saturated\n";
    std::vector<std::pair<double, double>> fit_points;
    json rows = json::array();
    std::uint64_t point_seed = cfg.seed;
    for (const double od : ods) {
        const double mu = mu0 * std::pow(10.0, -(od - od_min));
        const SimResult res = run_experiment(det, Source::poisson(mu), cfg.n_pulses, point_seed++);
        const ClickSample sample = res.to_sample();
        json row{{"od", od}, {"mu_true", mu}};
        if (sample_mean(sample) >= cfg.detector.n) {
            row["saturated"] = true;
            csv << od << ',' << mu << ",,," << 1 << '\n';
        } else {
            const MuEstimate est = mle_mu(cfg.detector, sample);
            row["saturated"] = false;
            row["mu_hat"] = est.mu_hat;
            row["std"] = est.std_dev;
            csv << od << ',' << mu << ',' << est.mu_hat << ',' << est.std_dev << ",0\n";
            if (est.mu_hat > 0.0) fit_points.emplace_back(od, est.mu_hat);
        }
        rows.push_back(row);
    }
    write_text(out_dir / "sweep.csv", csv.str());

    json summary{{"command", "sweep"},
                 {"detector", detector_json(cfg.detector)},
                 {"mu0", mu0},
                 {"od_list", ods},
                 {"n_pulses", cfg.n_pulses},
                 {"seed", cfg.seed},
                 {"points", rows}};
    const AttenuationFit fit = attenuation_fit(fit_points);  // throws if < 2 usable points
    summary["fit"] = {{"amplitude", fit.amplitude},
                      {"decade_slope", fit.decade_slope},
                      {"residuals", fit.residuals}};
    write_json(out_dir / "summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_classify(const RunConfig& cfg, int m_max, const fs::path& out_dir) {
    const FockClassification cls =
        (m_max >= 0) ? fock_classify(cfg.detector, m_max) : fock_classify(cfg.detector);
    const int effective_m_max = static_cast<int>(cls.success_probs.size()) - 1;

    std::ostringstream csv;  // confusion matrix: rows m, columns x
    for (int m = 0; m <= effective_m_max; ++m) {
        const ClickPMF pmf = click_pmf_fock(cfg.detector, m);
        for (int x = 0; x <= cfg.detector.n; ++x) csv << (x ? "," : "") << pmf.probs[x];
        csv << '\n';
    }
    write_text(out_dir / "confusion.csv", csv.str());

    json summary{{"command", "classify"},
                 {"detector", detector_json(cfg.detector)},
                 {"m_max", effective_m_max},
                 {"decision_map", cls.decision_map},
                 {"success_probs", cls.success_probs},
                 {"max_resolvable", cls.max_resolvable}};
    write_json(out_dir / "classify.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_bandwidth(const RunConfig& cfg, double dl_min, double dl_max, int steps,
                  const fs::path& out_dir) {
    if (steps < 1) throw InvalidConfig("--delta-lambda-range needs at least 1 step");
    std::ostringstream csv;
    csv << "delta_lambda_nm";
    for (int b = 0; b < cfg.multiplexer.bin_count(); ++b) csv << ",bin" << b;
    csv << ",effective_array_size\n";
    json rows = json::array();
    for (int i = 0; i < steps; ++i) {
        const double dl =
            (steps == 1) ? dl_min : dl_min + (dl_max - dl_min) * i / (steps - 1.0);
        const BinWeights bw = bin_weights(cfg.multiplexer, dl);
        const int eff = effective_array_size(cfg.multiplexer, dl);
        csv << dl;
        for (double f : bw.fractions) csv << ',' << f;
        csv << ',' << eff << '\n';
        rows.push_back({{"delta_lambda_nm", dl}, {"effective_array_size", eff}});
    }
    write_text(out_dir / "bandwidth.csv", csv.str());

    const BinWeights at_zero = bin_weights(cfg.multiplexer, 0.0);
    json summary{{"command", "bandwidth"},
                 {"slope_a", cfg.multiplexer.coupler.slope_a},
                 {"linear_coeffs", at_zero.linear_coeffs},
                 {"loss_budget",
                  {{"total_db", loss_budget(cfg.multiplexer).total_db},
                   {"transmission", loss_budget(cfg.multiplexer).transmission},
                   {"measured_db_reference", kMeasuredLossDbReference}}},
                 {"rows", rows}};
    write_json(out_dir / "summary.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_ingest(const RunConfig& cfg, const std::string& timetag_path, const fs::path& out_dir) {
    std::ifstream in(timetag_path);
    if (!in) throw std::ios_base::failure("cannot open time-tag file " + timetag_path);
    const auto records = parse_timetags(in);
    const BinnedEvents binned = bin_events(records, cfg.trigger);

    std::ostringstream sample_csv;
    write_click_sample(sample_csv, binned.sample);
    write_text(out_dir / "sample.csv", sample_csv.str());

    json summary{{"command", "ingest"},
                 {"timetag_file", timetag_path},
                 {"n_pulses", binned.sample.pulses()},
                 {"assigned_events", binned.assigned_events},
                 {"stray_events", binned.stray_events}};
    DetectorConfig det = cfg.detector;
    det.n = binned.sample.n_bins;
    if (sample_mean(binned.sample) < det.n)
        summary["estimate"] = estimate_json(det, binned.sample);
    else
        summary["estimate"] = nullptr;
    write_json(out_dir / "estimate.json", summary);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"temporal-array photon-number-resolving detector toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--seed", seed_override, "override the RNG seed");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo detection chain");
    std::optional<double> opt_mu;
    std::optional<long> opt_fock_m;
    std::optional<std::uint64_t> opt_pulses;
    simulate->add_option("--mu", opt_mu, "Poissonian source mean photon number");
    simulate->add_option("--fock-m", opt_fock_m, "Fock source photon number");
    simulate->add_option("--n-pulses", opt_pulses, "number of pulses");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "MLE mean photon number from a sample CSV");
    std::string sample_path;
    estimate->add_option("--sample", sample_path, "click sample CSV (one count per line)")
        ->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "attenuation sweep with exponential fit");
    std::vector<double> od_list;
    double mu0 = 150.0;
    sweep->add_option("--od-list", od_list, "attenuation OD values")->required()->delimiter(',');
    sweep->add_option("--mu0", mu0, "mean photon number at the smallest OD");
    sweep->add_option("--n-pulses", opt_pulses, "pulses per sweep point");

    // classify
    auto* classify = app.add_subcommand("classify", "single-shot Fock classification limits");
    int m_max = -1;
    classify->add_option("--m-max", m_max, "largest photon number considered (default 2n)");

    // bandwidth
    auto* bandwidth = app.add_subcommand("bandwidth", "wavelength dependence of bin weights");
    std::vector<double> dl_range{-10.0, 10.0};
    int dl_steps = 21;
    bandwidth->add_option("--delta-lambda-range", dl_range, "min and max offset in nm")
        ->expected(2);
    bandwidth->add_option("--steps", dl_steps, "grid points");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "bin a time-tag CSV into a click sample");
    std::string timetag_path;
    ingest->add_option("--timetags", timetag_path, "time-tag CSV (channel,timestamp_ps)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (opt_pulses) cfg.n_pulses = *opt_pulses;
        if (opt_mu && opt_fock_m) throw InvalidConfig("--mu and --fock-m are exclusive");
        if (opt_mu) cfg.source = Source::poisson(*opt_mu);
        if (opt_fock_m) cfg.source = Source::fock(*opt_fock_m);

        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (estimate->parsed()) return cmd_estimate(cfg, sample_path, out);
        if (sweep->parsed()) return cmd_sweep(cfg, od_list, mu0, out);
        if (classify->parsed()) return cmd_classify(cfg, m_max, out);
        if (bandwidth->parsed()) return cmd_bandwidth(cfg, dl_range[0], dl_range[1], dl_steps, out);
        if (ingest->parsed()) return cmd_ingest(cfg, timetag_path, out);
        return kExitConfig;
    } catch (const SaturatedSample& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
