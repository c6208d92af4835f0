#ifndef TPNR_SAMPLE_IO_HPP
#define TPNR_SAMPLE_IO_HPP

#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "tpnr/errors.hpp"
#include "tpnr/estimation.hpp"
#include "tpnr/montecarlo.hpp"

namespace tpnr {

/// ClickSample CSV: one click count per line, pulse order preserved on
/// write, irrelevant on read (only the histogram matters downstream).
inline ClickSample read_click_sample(std::istream& in, int n_bins) {
    ClickSample s;
    s.n_bins = n_bins;
    s.histogram.assign(n_bins + 1, 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int x = 0;
        auto r = std::from_chars(line.data(), line.data() + line.size(), x);
        if (r.ec != std::errc() || r.ptr != line.data() + line.size())
            throw ParseError("expected a bare integer click count", lineno);
        if (x < 0 || x > n_bins)
            throw ParseError("click count " + std::to_string(x) + " outside {0.." +
                             std::to_string(n_bins) + "}", lineno);
        ++s.histogram[x];
    }
    return s;
}

inline void write_click_sample(std::ostream& out, const ClickSample& s) {
    for (std::size_t x = 0; x < s.histogram.size(); ++x)
        for (std::uint64_t i = 0; i < s.histogram[x]; ++i) out << x << '\n';
}

/// Histogram CSV: "x,count" per line, x ascending, no header.
inline void write_histogram(std::ostream& out, const SimResult& res) {
    for (std::size_t x = 0; x < res.histogram.size(); ++x)
        out << x << ',' << res.histogram[x] << '\n';
}

inline ClickSample read_histogram(std::istream& in, int n_bins) {
    ClickSample s;
    s.n_bins = n_bins;
    s.histogram.assign(n_bins + 1, 0);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ParseError("expected \"x,count\"", lineno);
        int x = 0;
        std::uint64_t count = 0;
        auto r1 = std::from_chars(line.data(), line.data() + comma, x);
        auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), count);
        if (r1.ec != std::errc() || r2.ec != std::errc() ||
            r2.ptr != line.data() + line.size())
            throw ParseError("expected \"x,count\"", lineno);
        if (x < 0 || x > n_bins) throw ParseError("click count out of range", lineno);
        s.histogram[x] += count;
    }
    return s;
}

}  // namespace tpnr

#endif
