#ifndef REACHCAST_GEOMETRY_HPP
#define REACHCAST_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "reachcast/tensor.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

/**
 * One surveyed cross-section. Stations/elevations are metres internally; the
 * file parser converts from feet when the header declares US units.
 *
 * Derived members:
 *   z_bed  = minimum profile elevation (thalweg)
 *   z_bank = min of the elevations at the two bank stations (linearly
 *            interpolated along the profile), the overtopping threshold
 */
struct CrossSection {
    double chainage = 0.0;                 // downstream distance along centerline [m]
    std::vector<double> stations;          // strictly increasing [m]
    std::vector<double> elevations;        // same length as stations [m]
    double bank_left = 0.0;                // station of left bank [m]
    double bank_right = 0.0;               // station of right bank [m]
    double manning_n = 0.0;
    double z_bed = 0.0;
    double z_bank = 0.0;

    double channel_width() const { return bank_right - bank_left; }

    /// Linear interpolation of the profile elevation at a station.
    double elevation_at(double station) const {
        if (station <= stations.front()) return elevations.front();
        if (station >= stations.back()) return elevations.back();
        auto it = std::upper_bound(stations.begin(), stations.end(), station);
        const std::size_t i = static_cast<std::size_t>(it - stations.begin());
        const double x0 = stations[i - 1], x1 = stations[i];
        const double t = (station - x0) / (x1 - x0);
        return elevations[i - 1] * (1.0 - t) + elevations[i] * t;
    }

    void derive() {
        z_bed = *std::min_element(elevations.begin(), elevations.end());
        z_bank = std::min(elevation_at(bank_left), elevation_at(bank_right));
    }

    void validate() const {
        if (stations.size() < 2)
            throw ParseError("cross-section profile needs at least 2 points");
        for (std::size_t i = 1; i < stations.size(); ++i)
            if (stations[i] <= stations[i - 1])
                throw ParseError("profile stations must be strictly increasing");
        if (!(bank_left < bank_right))
            throw ParseError("bank stations must satisfy left < right");
        if (bank_left < stations.front() || bank_right > stations.back())
            throw ParseError("bank stations outside the profile station range");
        if (!(manning_n > 0.0) || manning_n > 0.2)
            throw ParseError("manning n must lie in (0, 0.2]");
    }
};

struct Reach {
    std::string id;
    std::vector<CrossSection> xs; // index 0 = upstream
    std::vector<double> x_coord;  // normalized chainage in [0, 1]

    std::size_t size() const { return xs.size(); }

    void derive_x_coord() {
        const double c0 = xs.front().chainage;
        const double span = xs.back().chainage - c0;
        x_coord.resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            x_coord[i] = (xs[i].chainage - c0) / span;
    }

    void validate() const {
        if (xs.size() < 3) throw ParseError("reach needs at least 3 cross-sections");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i].chainage <= xs[i - 1].chainage)
                throw ParseError("chainage must increase strictly downstream");
        for (const auto& s : xs) s.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& tok, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + tok + "'", line);
    }
}

} // namespace detail

/**
 * Parse the line-oriented geometry format:
 *
 *   REACH: <id>
 *   UNITS: SI|US
 *   XS <chainage>
 *   N <manning_n>
 *   BANKS <left_station> <right_station>
 *   PROFILE
 *   <station> <elevation>
 *   ...
 *   END
 *   (next XS block...)
 *
 * US files carry feet; everything is converted to metres on ingest. Blank
 * lines and '#' comments are ignored.
 */
inline Reach parse_geometry(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::size_t lineno = 0;

    Reach reach;
    bool have_units = false;
    double unit = 1.0; // multiplier to metres

    CrossSection cur;
    bool in_xs = false, in_profile = false, have_n = false, have_banks = false;

    auto finish_xs = [&](std::size_t line) {
        if (!in_xs) return;
        if (!have_n) throw ParseError("cross-section missing roughness (N line)", line);
        if (!have_banks) throw ParseError("cross-section missing BANKS line", line);
        for (auto& v : cur.stations) v *= unit;
        for (auto& v : cur.elevations) v *= unit;
        cur.bank_left *= unit;
        cur.bank_right *= unit;
        cur.chainage *= unit;
        try {
            cur.validate();
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
        cur.derive();
        reach.xs.push_back(cur);
        cur = CrossSection{};
        in_xs = in_profile = have_n = have_banks = false;
    };

    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;

        std::istringstream ls(line);
        std::string key;
        ls >> key;

        if (key == "REACH:") {
            std::string id = detail::trim(line.substr(line.find(':') + 1));
            if (id.empty()) throw ParseError("REACH: requires an id", lineno);
            reach.id = id;
        } else if (key == "UNITS:") {
            std::string u;
            ls >> u;
            if (u == "SI") unit = 1.0;
            else if (u == "US") unit = kMetresPerFoot;
            else throw ParseError("UNITS must be SI or US, got '" + u + "'", lineno);
            have_units = true;
        } else if (key == "XS") {
            finish_xs(lineno);
            std::string tok;
            if (!(ls >> tok)) throw ParseError("XS requires a chainage", lineno);
            cur.chainage = detail::parse_double(tok, lineno);
            in_xs = true;
        } else if (key == "N") {
            if (!in_xs) throw ParseError("N outside a cross-section block", lineno);
            std::string tok;
            if (!(ls >> tok)) throw ParseError("N requires a value", lineno);
            cur.manning_n = detail::parse_double(tok, lineno);
            have_n = true;
        } else if (key == "BANKS") {
            if (!in_xs) throw ParseError("BANKS outside a cross-section block", lineno);
            std::string l, r;
            if (!(ls >> l >> r)) throw ParseError("BANKS requires two stations", lineno);
            cur.bank_left = detail::parse_double(l, lineno);
            cur.bank_right = detail::parse_double(r, lineno);
            have_banks = true;
        } else if (key == "PROFILE") {
            if (!in_xs) throw ParseError("PROFILE outside a cross-section block", lineno);
            in_profile = true;
        } else if (key == "END") {
            if (!in_xs) throw ParseError("END without an open cross-section block", lineno);
            finish_xs(lineno);
        } else if (in_profile) {
            std::istringstream ps(line);
            std::string s, e, extra;
            if (!(ps >> s >> e) || (ps >> extra))
                throw ParseError("profile line must be '<station> <elevation>'", lineno);
            cur.stations.push_back(detail::parse_double(s, lineno));
            cur.elevations.push_back(detail::parse_double(e, lineno));
        } else {
            throw ParseError("unrecognized directive '" + key + "'", lineno);
        }
    }
    finish_xs(lineno);

    if (reach.id.empty()) throw ParseError("missing REACH: header");
    if (!have_units) throw ParseError("missing UNITS: header");
    reach.validate();
    reach.derive_x_coord();
    return reach;
}

/// Emit a geometry file in SI units; parse_geometry(serialize_geometry(r))
/// reproduces r field-for-field.
inline std::string serialize_geometry(const Reach& reach) {
    std::ostringstream out;
    out.precision(17);
    out << "REACH: " << reach.id << "\n";
    out << "UNITS: SI\n";
    for (const auto& s : reach.xs) {
        out << "XS " << s.chainage << "\n";
        out << "N " << s.manning_n << "\n";
        out << "BANKS " << s.bank_left << " " << s.bank_right << "\n";
        out << "PROFILE\n";
        for (std::size_t i = 0; i < s.stations.size(); ++i)
            out << s.stations[i] << " " << s.elevations[i] << "\n";
        out << "END\n";
    }
    return out.str();
}

/// Time-invariant feature table, columns (z_bed, z_bank, n_man, x_coord).
inline Tensor<double> static_features(const Reach& reach) {
    Tensor<double> out({reach.size(), 4});
    for (std::size_t i = 0; i < reach.size(); ++i) {
        out.at2(i, 0) = reach.xs[i].z_bed;
        out.at2(i, 1) = reach.xs[i].z_bank;
        out.at2(i, 2) = reach.xs[i].manning_n;
        out.at2(i, 3) = reach.x_coord[i];
    }
    return out;
}

} // namespace reachcast

#endif // REACHCAST_GEOMETRY_HPP
