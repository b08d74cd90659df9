#ifndef REACHCAST_ORACLE_HPP
#define REACHCAST_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "reachcast/forcings.hpp"
#include "reachcast/geometry.hpp"
#include "reachcast/hydraulics.hpp"
#include "reachcast/state.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

/**
 * Configuration of the reference routing scheme. The oracle stands in for a
 * full unsteady solver as the data generator: diffusive-wave Muskingum-Cunge
 * discharge routing cell to cell, stage from Manning normal depth with a
 * linear backwater blend toward the downstream boundary over the final
 * max(3, N/5) cross-sections.
 */
struct OracleConfig {
    int substeps = 8;          // routing substeps per hourly step
    double min_slope = 1e-6;   // floor for local bed slope
    double q_ref_floor = 1e-3; // discharge floor for celerity evaluation [m^3/s]
};

namespace detail {

struct SegmentGeom {
    double dx;     // length [m]
    double width;  // mean bank-to-bank width [m]
    double slope;  // local bed slope (positive)
    double n;      // mean roughness
};

struct SectionGeom {
    double width;
    double slope;
    double n;
    double z_bed;
};

inline std::vector<SegmentGeom> segment_geometry(const Reach& reach, double min_slope) {
    std::vector<SegmentGeom> segs(reach.size() - 1);
    for (std::size_t i = 0; i + 1 < reach.size(); ++i) {
        const auto& a = reach.xs[i];
        const auto& b = reach.xs[i + 1];
        segs[i].dx = b.chainage - a.chainage;
        segs[i].width = 0.5 * (a.channel_width() + b.channel_width());
        segs[i].slope = std::max((a.z_bed - b.z_bed) / segs[i].dx, min_slope);
        segs[i].n = 0.5 * (a.manning_n + b.manning_n);
    }
    return segs;
}

inline std::vector<SectionGeom> section_geometry(const Reach& reach, double min_slope) {
    const std::size_t n = reach.size();
    std::vector<SectionGeom> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t down = std::min(i, n - 2); // downstream-facing segment
        const auto& a = reach.xs[down];
        const auto& b = reach.xs[down + 1];
        out[i].width = reach.xs[i].channel_width();
        out[i].slope = std::max((a.z_bed - b.z_bed) / (b.chainage - a.chainage), min_slope);
        out[i].n = reach.xs[i].manning_n;
        out[i].z_bed = reach.xs[i].z_bed;
    }
    return out;
}

} // namespace detail

/// Backwater blend depth: the final max(3, N/5) cross-sections are pulled
/// toward the boundary stage with linearly decaying weight.
inline std::size_t backwater_blend_count(std::size_t n_xs) {
    return std::max<std::size_t>(3, n_xs / 5);
}

/**
 * Route boundary forcings down the reach. Contract:
 *   q[t][0]   = q_up[t]
 *   h[t][N-1] = h_dn[t]
 * Interior discharge marches segment by segment with Muskingum-Cunge
 * coefficients recomputed each substep from the local celerity; interior
 * stage is z_bed + normal depth, blended toward the boundary stage near the
 * downstream end. Any non-finite value aborts with a diagnostic.
 */
inline StateField route_reach(const Reach& reach, const ForcingSeries& forcings,
                              const OracleConfig& cfg = {}) {
    reach.validate();
    forcings.validate(2); // steady tests use short series; model-side code revalidates T >= 13
    if (cfg.substeps < 1) throw ConfigError("route_reach: substeps must be >= 1");

    const std::size_t n_xs = reach.size();
    const std::size_t n_seg = n_xs - 1;
    const std::size_t horizon = forcings.length();
    const auto segs = detail::segment_geometry(reach, cfg.min_slope);
    const auto secs = detail::section_geometry(reach, cfg.min_slope);

    StateField out;
    out.reach_id = reach.id;
    out.dt = forcings.dt;
    out.resize(horizon, n_xs);

    // steady initialization at the first inflow
    std::vector<double> inflow_prev(n_seg, forcings.q_up[0]);
    std::vector<double> outflow_prev(n_seg, forcings.q_up[0]);
    std::vector<double> q_now(n_xs, forcings.q_up[0]);

    const double dt_sub = forcings.dt / cfg.substeps;
    const std::size_t blend = backwater_blend_count(n_xs);

    auto record_hour = [&](std::size_t t) {
        q_now[0] = forcings.q_up[t];
        for (std::size_t i = 0; i < n_seg; ++i) q_now[i + 1] = outflow_prev[i];
        // backwater approximation: the deviation of the boundary stage from
        // its own normal stage decays linearly over the final `blend`
        // sections, so a normal-stage boundary reproduces the normal profile
        // exactly and the last section matches h_dn exactly.
        const auto& bsec = secs[n_xs - 1];
        const double boundary_anomaly =
            forcings.h_dn[t] -
            (bsec.z_bed + normal_depth(q_now[n_xs - 1], bsec.width, bsec.slope, bsec.n));
        for (std::size_t i = 0; i < n_xs; ++i) {
            const double q = q_now[i];
            double stage = secs[i].z_bed +
                           normal_depth(q, secs[i].width, secs[i].slope, secs[i].n);
            const std::size_t from_end = n_xs - 1 - i;
            if (from_end < blend) {
                const double lambda =
                    static_cast<double>(blend - from_end) / static_cast<double>(blend);
                stage += lambda * boundary_anomaly;
            }
            stage = std::max(stage, secs[i].z_bed);
            if (!std::isfinite(stage) || !std::isfinite(q))
                throw NumericError("route_reach: non-finite state at hour " +
                                       std::to_string(t) + ", xs " + std::to_string(i),
                                   static_cast<long>(t));
            out.h.at2(t, i) = stage;
            out.q.at2(t, i) = q;
        }
    };

    record_hour(0);

    for (std::size_t t = 1; t < horizon; ++t) {
        const double q0 = forcings.q_up[t - 1];
        const double q1 = forcings.q_up[t];
        for (int s = 1; s <= cfg.substeps; ++s) {
            const double frac1 = static_cast<double>(s) / cfg.substeps;
            double in_new = q0 + (q1 - q0) * frac1;
            for (std::size_t i = 0; i < n_seg; ++i) {
                const double q_ref = std::max(
                    (in_new + inflow_prev[i] + outflow_prev[i]) / 3.0, cfg.q_ref_floor);
                const double c =
                    wave_celerity(q_ref, segs[i].width, segs[i].slope, segs[i].n);
                const double k = segs[i].dx / c;
                double x = 0.5 - q_ref / (2.0 * c * segs[i].width * segs[i].slope *
                                          segs[i].dx);
                x = std::clamp(x, 0.0, 0.5);
                const double denom = 2.0 * k * (1.0 - x) + dt_sub;
                const double c1 = (dt_sub - 2.0 * k * x) / denom;
                const double c2 = (dt_sub + 2.0 * k * x) / denom;
                const double c3 = (2.0 * k * (1.0 - x) - dt_sub) / denom;
                double o =
                    c1 * in_new + c2 * inflow_prev[i] + c3 * outflow_prev[i];
                o = std::max(o, 0.0);
                inflow_prev[i] = in_new;
                outflow_prev[i] = o;
                in_new = o; // routed inflow for the next segment downstream
            }
        }
        record_hour(t);
    }
    return out;
}

} // namespace reachcast

#endif // REACHCAST_ORACLE_HPP
