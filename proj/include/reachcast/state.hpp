#ifndef REACHCAST_STATE_HPP
#define REACHCAST_STATE_HPP

#include <cmath>
#include <sstream>
#include <string>

#include "reachcast/tensor.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

/**
 * Dense (stage, discharge) field over time and cross-sections — the ground
 * truth produced by the routing oracle or a surrogate prediction. Stage and
 * discharge are stored as [T, N] float64 regardless of the model precision.
 */
struct StateField {
    std::string reach_id;
    double dt = kSecondsPerHour;
    Tensor<double> h; // [T, N] stage [m]
    Tensor<double> q; // [T, N] discharge [m^3/s]

    std::size_t steps() const { return h.rank() == 2 ? h.dim(0) : 0; }
    std::size_t sections() const { return h.rank() == 2 ? h.dim(1) : 0; }

    void resize(std::size_t t, std::size_t n) {
        h.resize({t, n});
        q.resize({t, n});
    }

    bool all_finite() const { return h.all_finite() && q.all_finite(); }
};

/// CSV rows `hour,xs_index,h,q`, hour-major.
inline std::string state_to_csv(const StateField& sf) {
    std::ostringstream out;
    out.precision(17);
    out << "hour,xs_index,h,q\n";
    for (std::size_t t = 0; t < sf.steps(); ++t)
        for (std::size_t i = 0; i < sf.sections(); ++i)
            out << t << "," << i << "," << sf.h.at2(t, i) << "," << sf.q.at2(t, i) << "\n";
    return out.str();
}

inline bool detail_state_is_blank(const std::string& s) {
    for (char c : s)
        if (!isspace(static_cast<unsigned char>(c))) return false;
    return true;
}

inline StateField state_from_csv(const std::string& text, const std::string& reach_id = "") {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty state file");
    ++lineno;
    {
        std::string h;
        for (char c : line)
            if (!isspace(static_cast<unsigned char>(c))) h += c;
        if (h != "hour,xs_index,h,q")
            throw ParseError("expected header 'hour,xs_index,h,q'", lineno);
    }
    std::vector<double> hs, qs;
    std::size_t n_xs = 0, rows = 0;
    std::size_t last_hour = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail_state_is_blank(line)) continue;
        std::istringstream ls(line);
        std::string a, b, c, d;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') ||
            !std::getline(ls, c, ',') || !std::getline(ls, d, ','))
            throw ParseError("expected 'hour,xs_index,h,q' row", lineno);
        std::size_t hour, xsi;
        double hv, qv;
        try {
            hour = static_cast<std::size_t>(std::stoull(a));
            xsi = static_cast<std::size_t>(std::stoull(b));
            hv = std::stod(c);
            qv = std::stod(d);
        } catch (const std::exception&) {
            throw ParseError("non-numeric value in row", lineno);
        }
        if (hour == 0) {
            if (xsi != rows) throw ParseError("xs_index must be dense from 0", lineno);
            n_xs = rows + 1;
        } else {
            if (n_xs == 0) throw ParseError("first hour block missing", lineno);
            if (xsi != rows % n_xs || hour != rows / n_xs)
                throw ParseError("rows must be hour-major and dense", lineno);
        }
        hs.push_back(hv);
        qs.push_back(qv);
        ++rows;
        last_hour = hour;
    }
    if (n_xs == 0 || rows % n_xs != 0) throw ParseError("incomplete final hour block");
    StateField sf;
    sf.reach_id = reach_id;
    sf.resize(last_hour + 1, n_xs);
    std::copy(hs.begin(), hs.end(), sf.h.data());
    std::copy(qs.begin(), qs.end(), sf.q.data());
    return sf;
}

} // namespace reachcast

#endif // REACHCAST_STATE_HPP
