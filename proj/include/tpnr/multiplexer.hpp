#ifndef TPNR_MULTIPLEXER_HPP
#define TPNR_MULTIPLEXER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "tpnr/errors.hpp"

namespace tpnr {

/// Fiber coupler: nominally 50/50 with a linear wavelength dependence
/// T = 1/2 + s * a * dlambda (s = +1 straight pass, -1 cross pass), plus a
/// fixed excess loss.
struct CouplerSpec {
    double slope_a = 0.005;       // 1/nm
    double excess_loss_db = 0.1;  // dB per coupler

    void validate() const {
        if (!(excess_loss_db >= 0.0)) throw InvalidConfig("excess_loss_db must be >= 0");
    }
};

/// One output time-bin of the multiplexer.
struct BinSlot {
    int fiber;                 // 1 or 2
    double arrival_offset_ns;  // delay relative to the earliest bin
};

/// Coupler delay tree: `stages` couplers in series, the first stages-1 of
/// them feeding delay loops, the last one splitting onto the two output
/// fibers. 2^stages bins in total.
///
/// Routing is a table, one row per bin: the sign (+1 straight, -1 cross)
/// of each coupler pass along that bin's path. The default table routes a
/// bin through the loop of stage j exactly when its sign there is -1, and
/// sends even sign-parity rows to fiber 2.
struct MultiplexerSpec {
    int stages = 4;
    std::vector<double> loop_delays_ns = {150.0, 300.0, 600.0};
    double fiber_loss_db_per_km = 2.5;
    double avg_path_m = 105.0;
    CouplerSpec coupler;
    std::vector<std::vector<int>> routing;  // [bin][stage] in {-1, +1}

    int bin_count() const { return 1 << stages; }

    static std::vector<std::vector<int>> default_routing(int stages) {
        std::vector<std::vector<int>> table(std::size_t{1} << stages);
        for (std::size_t b = 0; b < table.size(); ++b) {
            table[b].resize(stages);
            for (int j = 0; j < stages; ++j) table[b][j] = (b >> j) & 1 ? -1 : +1;
        }
        return table;
    }

    static MultiplexerSpec defaults() {
        MultiplexerSpec spec;
        spec.routing = default_routing(spec.stages);
        spec.validate();
        return spec;
    }

    int fiber_of(std::size_t bin) const {
        int minus = 0;
        for (int s : routing[bin]) minus += (s < 0);
        return (minus % 2 == 0) ? 2 : 1;
    }

    /// First-order coefficient c_i of fraction_i = 2^-stages + c_i a dlambda.
    double linear_coeff(std::size_t bin) const {
        int sum = 0;
        for (int s : routing[bin]) sum += s;
        return static_cast<double>(sum) / static_cast<double>(1 << (stages - 1));
    }

    void validate() const {
        coupler.validate();
        if (stages < 1) throw InvalidConfig("multiplexer needs at least 1 stage");
        if (static_cast<int>(loop_delays_ns.size()) != stages - 1)
            throw InvalidConfig("need exactly stages - 1 loop delays");
        for (std::size_t i = 1; i < loop_delays_ns.size(); ++i)
            if (!(loop_delays_ns[i] > loop_delays_ns[i - 1]))
                throw InvalidConfig("loop delays must be strictly increasing");
        if (!loop_delays_ns.empty() && !(loop_delays_ns.front() > 0.0))
            throw InvalidConfig("loop delays must be positive");
        if (!(fiber_loss_db_per_km >= 0.0) || !(avg_path_m >= 0.0))
            throw InvalidConfig("loss parameters must be >= 0");
        if (routing.size() != static_cast<std::size_t>(bin_count()))
            throw InvalidConfig("routing table must have 2^stages rows");
        for (const auto& row : routing) {
            if (static_cast<int>(row.size()) != stages)
                throw InvalidConfig("routing row must have one sign per stage");
            for (int s : row)
                if (s != 1 && s != -1) throw InvalidConfig("routing signs must be +1 or -1");
        }
        double csum = 0.0;
        for (std::size_t b = 0; b < routing.size(); ++b) csum += linear_coeff(b);
        if (std::abs(csum) > 1e-12)
            throw InvalidConfig("routing linear coefficients must sum to 0");
        if (stages == 4) validate_paper_multiset();
    }

private:
    // The 16-bin tree must reproduce the published coefficient multiset:
    // fiber 1 carries {+1/4 x4, -1/4 x4}, fiber 2 {0 x6, +1/2, -1/2}.
    void validate_paper_multiset() const {
        std::map<int, std::map<int, int>> counts;  // fiber -> (4*c) -> count
        for (std::size_t b = 0; b < routing.size(); ++b)
            ++counts[fiber_of(b)][static_cast<int>(std::lround(4.0 * linear_coeff(b)))];
        const std::map<int, int> fiber1{{1, 4}, {-1, 4}};
        const std::map<int, int> fiber2{{0, 6}, {2, 1}, {-2, 1}};
        if (counts[1] != fiber1 || counts[2] != fiber2)
            throw InvalidConfig("16-bin routing does not reproduce the coupler-tree "
                                "coefficient multiset");
    }
};

/// Normalized optical power per bin at a wavelength offset, with the
/// analytic first-order coefficients.
struct BinWeights {
    std::vector<double> fractions;
    std::vector<double> linear_coeffs;
};

inline BinWeights bin_weights(const MultiplexerSpec& spec, double delta_lambda_nm) {
    spec.validate();
    const double t = spec.coupler.slope_a * delta_lambda_nm;
    if (!(std::abs(t) < 0.5))
        throw InvalidConfig("|a * dlambda| must be < 1/2, got " + std::to_string(t));
    BinWeights bw;
    const std::size_t bins = spec.routing.size();
    bw.fractions.resize(bins);
    bw.linear_coeffs.resize(bins);
    double total = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
        double p = 1.0;
        for (int s : spec.routing[b]) p *= 0.5 + s * t;
        bw.fractions[b] = p;
        bw.linear_coeffs[b] = spec.linear_coeff(b);
        total += p;
    }
    // excess loss is bin-independent, so normalization removes it
    for (double& f : bw.fractions) f /= total;
    return bw;
}

/// Number of bins whose power holds or grows under the wavelength offset:
/// those with linear coefficient of the same sign as a * dlambda (or zero).
inline int effective_array_size(const MultiplexerSpec& spec, double delta_lambda_nm) {
    const BinWeights bw = bin_weights(spec, delta_lambda_nm);
    const double t = spec.coupler.slope_a * delta_lambda_nm;
    const double sgn = (t > 0.0) ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    int count = 0;
    for (double c : bw.linear_coeffs)
        if (c * sgn >= -1e-12) ++count;
    return count;
}

struct LossBudget {
    double total_db;
    double transmission;
};

/// Expected transmission loss: per-coupler excess loss plus fiber loss over
/// the average travel distance.
inline LossBudget loss_budget(const MultiplexerSpec& spec) {
    spec.validate();
    const double total = spec.stages * spec.coupler.excess_loss_db +
                         spec.fiber_loss_db_per_km * spec.avg_path_m / 1000.0;
    return {total, std::pow(10.0, -total / 10.0)};
}

/// Loss measured on the physical device, kept for comparison reporting.
inline constexpr double kMeasuredLossDbReference = 0.63;

/// Arrival schedule of the bins: per fiber, one bin per subset of the loop
/// delays. Throws if two same-fiber bins come closer than the detection
/// window.
inline std::vector<BinSlot> bin_schedule(const MultiplexerSpec& spec, double window_ns = 30.0) {
    spec.validate();
    std::vector<BinSlot> slots;
    slots.reserve(spec.routing.size());
    for (std::size_t b = 0; b < spec.routing.size(); ++b) {
        double delay = 0.0;
        for (int j = 0; j < spec.stages - 1; ++j)
            if (spec.routing[b][j] < 0) delay += spec.loop_delays_ns[j];
        slots.push_back({spec.fiber_of(b), delay});
    }
    std::sort(slots.begin(), slots.end(), [](const BinSlot& a, const BinSlot& b) {
        return a.fiber != b.fiber ? a.fiber < b.fiber : a.arrival_offset_ns < b.arrival_offset_ns;
    });
    for (std::size_t i = 1; i < slots.size(); ++i) {
        if (slots[i].fiber == slots[i - 1].fiber &&
            slots[i].arrival_offset_ns - slots[i - 1].arrival_offset_ns < window_ns)
            throw InvalidConfig("overlapping bins: same-fiber arrivals closer than the window");
    }
    return slots;
}

/// Setup efficiency: multiplexer transmission times the mean detector
/// efficiency.
inline double overall_efficiency(const MultiplexerSpec& spec,
                                 const std::vector<double>& detector_etas) {
    if (detector_etas.empty()) throw InvalidConfig("need at least one detector efficiency");
    double sum = 0.0;
    for (double e : detector_etas) {
        if (!(e >= 0.0 && e <= 1.0)) throw InvalidConfig("detector eta must lie in [0,1]");
        sum += e;
    }
    return loss_budget(spec).transmission * sum / static_cast<double>(detector_etas.size());
}

}  // namespace tpnr

#endif
