#ifndef REACHCAST_FORCINGS_HPP
#define REACHCAST_FORCINGS_HPP

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "reachcast/util.hpp"

namespace reachcast {

/**
 * Hourly boundary series: upstream discharge and downstream stage. The
 * surrogate needs at least one 12-hour window plus a target, hence T >= 13.
 */
struct ForcingSeries {
    std::int64_t t0 = 0;          // epoch seconds of hour 0 (0 when unknown)
    double dt = kSecondsPerHour;  // fixed hourly step
    std::vector<double> q_up;     // [m^3/s]
    std::vector<double> h_dn;     // [m]

    std::size_t length() const { return q_up.size(); }

    void validate(std::size_t min_length = 13) const {
        if (q_up.size() != h_dn.size())
            throw ParseError("q_up and h_dn lengths differ");
        if (q_up.size() < min_length)
            throw ParseError("forcing series too short: T = " + std::to_string(q_up.size()) +
                             " < " + std::to_string(min_length) +
                             " (one 12-hour window plus target)");
        for (std::size_t i = 0; i < q_up.size(); ++i) {
            if (!std::isfinite(q_up[i]) || !std::isfinite(h_dn[i]))
                throw ParseError("NaN/inf in forcing series at hour " + std::to_string(i));
            if (q_up[i] < 0.0)
                throw ParseError("negative discharge at hour " + std::to_string(i));
        }
    }
};

/// Parse CSV `hour,q_up,h_dn` with hour = 0,1,2,...
inline ForcingSeries parse_forcings(const std::string& text, std::size_t min_length = 13) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    ForcingSeries fs;

    if (!std::getline(in, line)) throw ParseError("empty forcing file");
    ++lineno;
    // tolerate whitespace and \r around the header
    {
        std::string h;
        for (char c : line)
            if (!isspace(static_cast<unsigned char>(c))) h += c;
        if (h != "hour,q_up,h_dn")
            throw ParseError("expected header 'hour,q_up,h_dn'", lineno);
    }

    std::size_t expect_hour = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t;
        for (char c : line)
            if (!isspace(static_cast<unsigned char>(c))) t += c;
        if (t.empty()) continue;
        std::istringstream ls(t);
        std::string hour_s, q_s, h_s;
        if (!std::getline(ls, hour_s, ',') || !std::getline(ls, q_s, ',') ||
            !std::getline(ls, h_s, ','))
            throw ParseError("expected 'hour,q_up,h_dn' row", lineno);
        double hour, q, h;
        try {
            hour = std::stod(hour_s);
            q = std::stod(q_s);
            h = std::stod(h_s);
        } catch (const std::exception&) {
            throw ParseError("non-numeric value in row", lineno);
        }
        if (hour != static_cast<double>(expect_hour))
            throw ParseError("non-uniform hour column: expected " +
                                 std::to_string(expect_hour),
                             lineno);
        if (!std::isfinite(q) || !std::isfinite(h))
            throw ParseError("NaN value in row", lineno);
        if (q < 0.0) throw ParseError("negative discharge", lineno);
        fs.q_up.push_back(q);
        fs.h_dn.push_back(h);
        ++expect_hour;
    }
    fs.validate(min_length);
    return fs;
}

inline std::string serialize_forcings(const ForcingSeries& fs) {
    std::ostringstream out;
    out.precision(17);
    out << "hour,q_up,h_dn\n";
    for (std::size_t t = 0; t < fs.length(); ++t)
        out << t << "," << fs.q_up[t] << "," << fs.h_dn[t] << "\n";
    return out.str();
}

} // namespace reachcast

#endif // REACHCAST_FORCINGS_HPP
