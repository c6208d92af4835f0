#ifndef TPNR_INGEST_HPP
#define TPNR_INGEST_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "tpnr/errors.hpp"
#include "tpnr/estimation.hpp"
#include "tpnr/multiplexer.hpp"

namespace tpnr {

/// One time-tagger event. Channel 0 is the trigger; detector channels are
/// positive.
struct TimeTagRecord {
    int channel;
    std::int64_t timestamp_ps;
};

/// Trigger-synchronized binning configuration: pulse period, detection
/// window, and per-channel expected arrival offsets.
struct TriggerConfig {
    double period_ns = 10000.0;  // 100 kHz repetition rate
    double window_ns = 30.0;
    std::map<int, std::vector<double>> bin_offsets_ns;  // channel -> offsets

    /// Offsets taken from the multiplexer schedule: fiber 1 -> channel 1,
    /// fiber 2 -> channel 2, shifted by a base propagation delay so every
    /// window opens after its trigger.
    static TriggerConfig from_schedule(const MultiplexerSpec& spec, double base_offset_ns = 50.0,
                                       double window_ns = 30.0) {
        TriggerConfig cfg;
        cfg.window_ns = window_ns;
        for (const BinSlot& slot : bin_schedule(spec, window_ns))
            cfg.bin_offsets_ns[slot.fiber].push_back(base_offset_ns + slot.arrival_offset_ns);
        cfg.validate();
        return cfg;
    }

    static TriggerConfig defaults() { return from_schedule(MultiplexerSpec::defaults()); }

    int window_count() const {
        int n = 0;
        for (const auto& [ch, offs] : bin_offsets_ns) n += static_cast<int>(offs.size());
        return n;
    }

    void validate() const {
        if (!(window_ns > 0.0)) throw InvalidConfig("window_ns must be > 0");
        if (!(period_ns > 0.0)) throw InvalidConfig("period_ns must be > 0");
        if (bin_offsets_ns.empty()) throw InvalidConfig("no bin offsets configured");
        for (const auto& [ch, offs] : bin_offsets_ns) {
            if (ch == 0) throw InvalidConfig("channel 0 is reserved for the trigger");
            std::vector<double> sorted = offs;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 1; i < sorted.size(); ++i)
                if (sorted[i] - sorted[i - 1] < window_ns)
                    throw InvalidConfig("overlapping windows on channel " + std::to_string(ch));
        }
    }
};

/// Parse the time-tag CSV: lines "channel,timestamp_ps", no header.
inline std::vector<TimeTagRecord> parse_timetags(std::istream& in) {
    std::vector<TimeTagRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError("expected exactly two fields \"channel,timestamp_ps\"", lineno);
        TimeTagRecord rec{};
        const char* b = line.data();
        auto r1 = std::from_chars(b, b + comma, rec.channel);
        if (r1.ec != std::errc() || r1.ptr != b + comma)
            throw ParseError("bad channel field", lineno);
        const char* tb = b + comma + 1;
        const char* te = b + line.size();
        auto r2 = std::from_chars(tb, te, rec.timestamp_ps);
        if (r2.ec != std::errc() || r2.ptr != te || rec.timestamp_ps < 0)
            throw ParseError("bad timestamp field", lineno);
        if (rec.channel < 0 || rec.channel > 16)
            throw ParseError("unknown channel " + std::to_string(rec.channel), lineno);
        records.push_back(rec);
    }
    return records;
}

struct BinnedEvents {
    ClickSample sample;
    std::uint64_t assigned_events = 0;  // detector events inside some window
    std::uint64_t stray_events = 0;     // outside all windows or before first trigger
};

/// Trigger-synchronized binning: each detector event is matched against the
/// windows [t_trig + off - w/2, t_trig + off + w/2) of its most recent
/// trigger. A window with one or more events contributes one click.
inline BinnedEvents bin_events(std::vector<TimeTagRecord> records, const TriggerConfig& cfg) {
    cfg.validate();
    std::stable_sort(records.begin(), records.end(),
                     [](const TimeTagRecord& a, const TimeTagRecord& b) {
                         return a.timestamp_ps < b.timestamp_ps;
                     });

    std::vector<std::int64_t> triggers;
    for (const auto& rec : records)
        if (rec.channel == 0) triggers.push_back(rec.timestamp_ps);
    if (triggers.empty()) throw InvalidConfig("no trigger events in stream");

    const int n_windows = cfg.window_count();
    // per pulse: set of (channel, window index) that clicked
    std::vector<std::vector<char>> clicked(triggers.size());
    BinnedEvents out;
    std::vector<int> counts(triggers.size(), 0);

    for (const auto& rec : records) {
        if (rec.channel == 0) continue;
        // most recent trigger at or before the event
        const auto it = std::upper_bound(triggers.begin(), triggers.end(), rec.timestamp_ps);
        if (it == triggers.begin()) {
            ++out.stray_events;
            continue;
        }
        const std::size_t pulse = static_cast<std::size_t>(it - triggers.begin()) - 1;
        const double rel_ns = static_cast<double>(rec.timestamp_ps - triggers[pulse]) * 1e-3;

        const auto offs_it = cfg.bin_offsets_ns.find(rec.channel);
        int window = -1;
        int window_base = 0;
        if (offs_it != cfg.bin_offsets_ns.end()) {
            for (const auto& [ch, offs] : cfg.bin_offsets_ns) {
                if (ch == rec.channel) break;
                window_base += static_cast<int>(offs.size());
            }
            const auto& offs = offs_it->second;
            for (std::size_t w = 0; w < offs.size(); ++w) {
                if (rel_ns >= offs[w] - cfg.window_ns / 2.0 &&
                    rel_ns < offs[w] + cfg.window_ns / 2.0) {
                    window = window_base + static_cast<int>(w);
                    break;
                }
            }
        }
        if (window < 0) {
            ++out.stray_events;
            continue;
        }
        ++out.assigned_events;
        auto& flags = clicked[pulse];
        if (flags.empty()) flags.assign(n_windows, 0);
        if (!flags[window]) {
            flags[window] = 1;
            ++counts[pulse];
        }
    }

    out.sample.n_bins = n_windows;
    out.sample.histogram.assign(n_windows + 1, 0);
    for (int c : counts) ++out.sample.histogram[c];
    return out;
}

/// First-order probability for a dark count inside one detection window.
inline double dark_prob_per_bin(double rate_hz, double window_ns) {
    if (!(rate_hz >= 0.0)) throw InvalidConfig("dark rate must be >= 0");
    if (!(window_ns > 0.0)) throw InvalidConfig("window must be > 0");
    const double p = rate_hz * window_ns * 1e-9;
    if (p >= 1.0) throw InvalidConfig("rate * window >= 1 is nonphysical for this model");
    return p;
}

/// Synthesize a time-tag stream realizing the given per-pulse click
/// patterns (window indices in the flattened channel/offset order used by
/// bin_events). Inverse of bin_events for distinct windows.
inline void write_timetags(std::ostream& out, const std::vector<std::vector<int>>& patterns,
                           const TriggerConfig& cfg, std::int64_t t0_ps = 0) {
    cfg.validate();
    std::vector<std::pair<int, double>> windows;  // (channel, offset)
    for (const auto& [ch, offs] : cfg.bin_offsets_ns)
        for (double o : offs) windows.emplace_back(ch, o);
    const std::int64_t period_ps = static_cast<std::int64_t>(cfg.period_ns * 1e3);
    for (std::size_t pulse = 0; pulse < patterns.size(); ++pulse) {
        const std::int64_t trig = t0_ps + static_cast<std::int64_t>(pulse) * period_ps;
        out << 0 << ',' << trig << '\n';
        for (int w : patterns[pulse]) {
            if (w < 0 || w >= static_cast<int>(windows.size()))
                throw InvalidConfig("pattern window index out of range");
            const auto& [ch, off] = windows[w];
            out << ch << ',' << trig + static_cast<std::int64_t>(off * 1e3) << '\n';
        }
    }
}

}  // namespace tpnr

#endif
