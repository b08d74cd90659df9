#ifndef REACHCAST_SYNTHETIC_HPP
#define REACHCAST_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "reachcast/forcings.hpp"
#include "reachcast/geometry.hpp"
#include "reachcast/hydraulics.hpp"
#include "reachcast/oracle.hpp"
#include "reachcast/rng.hpp"

namespace reachcast {

/**
 * Recipe for one synthetic reach and its boundary forcings. All generation
 * is a pure function of the spec (fixed draw order from a seeded stream), so
 * a given spec reproduces bit-identical outputs.
 */
struct SyntheticSpec {
    std::uint64_t seed = 7;
    std::size_t n_xs = 40;
    double length_m = 20000.0;
    double slope = 3e-4;          // mean bed slope
    double base_width_m = 50.0;
    double manning_lo = 0.030;
    double manning_hi = 0.045;
    int event_count = 3;
    double peak_lo_m3s = 150.0;   // flood pulse crest range
    double peak_hi_m3s = 600.0;
    std::size_t duration_hours = 2000;

    void validate() const {
        if (n_xs < 3) throw ConfigError("SyntheticSpec: n_xs must be >= 3");
        if (!(slope > 0.0)) throw ConfigError("SyntheticSpec: slope must be positive");
        if (!(manning_lo > 0.0) || manning_hi > 0.2 || manning_lo > manning_hi)
            throw ConfigError("SyntheticSpec: manning range must lie in (0, 0.2]");
        if (duration_hours < 13)
            throw ConfigError("SyntheticSpec: duration must be >= 13 hours");
        if (event_count < 0 || peak_lo_m3s > peak_hi_m3s || peak_lo_m3s <= 0)
            throw ConfigError("SyntheticSpec: bad event configuration");
        if (!(length_m > 0.0) || !(base_width_m > 0.0))
            throw ConfigError("SyntheticSpec: length and width must be positive");
    }
};

/// Quiescent flow between flood pulses, sized off the smallest crest.
inline double synthetic_base_flow(const SyntheticSpec& spec) {
    return std::max(2.0, 0.06 * spec.peak_lo_m3s);
}

/**
 * Trapezoid-profile reach with per-section jitter on spacing, width, local
 * slope and roughness. Bank tops are sized 1.35x the normal depth of the
 * largest configured crest so training flows stay in-bank.
 */
inline Reach gen_synthetic_reach(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork(0xA11CE);

    const std::size_t n = spec.n_xs;
    Reach reach;
    reach.id = "synthetic-" + std::to_string(spec.seed);
    reach.xs.resize(n);

    // jittered spacing, rescaled to the exact total length
    std::vector<double> dx(n - 1);
    double total = 0.0;
    for (auto& d : dx) {
        d = 0.7 + 0.6 * rng.uniform();
        total += d;
    }
    for (auto& d : dx) d *= spec.length_m / total;

    std::vector<double> chainage(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) chainage[i] = chainage[i - 1] + dx[i - 1];

    // bed profile: local slope jitter around the mean, strictly descending
    std::vector<double> z_bed(n);
    z_bed[0] = spec.slope * spec.length_m;
    for (std::size_t i = 1; i < n; ++i) {
        const double s_local = spec.slope * (0.6 + 0.8 * rng.uniform());
        z_bed[i] = z_bed[i - 1] - s_local * dx[i - 1];
    }

    for (std::size_t i = 0; i < n; ++i) {
        CrossSection& xs = reach.xs[i];
        xs.chainage = chainage[i];
        xs.manning_n = rng.uniform(spec.manning_lo, spec.manning_hi);
        const double width = spec.base_width_m * (0.85 + 0.3 * rng.uniform());
        const double margin = 0.15 * width;

        const double d_ref =
            normal_depth(spec.peak_hi_m3s, width, std::max(spec.slope * 0.6, 1e-6),
                         spec.manning_hi);
        const double bank_h = 1.35 * d_ref + 1.5;

        const double zb = z_bed[i];
        const double ztop = zb + bank_h;
        xs.stations = {0.0, margin, margin + 0.25 * width, margin + 0.75 * width,
                       margin + width, margin + width + margin};
        xs.elevations = {ztop + 2.0, ztop, zb, zb, ztop, ztop + 2.0};
        xs.bank_left = margin;
        xs.bank_right = margin + width;
        xs.derive();
    }
    reach.validate();
    reach.derive_x_coord();
    return reach;
}

/**
 * Boundary forcings: low base flow plus event_count gamma-shaped flood
 * pulses; the downstream stage is made consistent with the routed outflow
 * (one provisional routing pass) plus slow sinusoidal noise.
 */
inline ForcingSeries gen_synthetic_forcings(const SyntheticSpec& spec, const Reach& reach,
                                            const OracleConfig& oracle_cfg = {}) {
    spec.validate();
    Rng rng = Rng(spec.seed).fork(0xF02C);

    const std::size_t horizon = spec.duration_hours;
    const double base = synthetic_base_flow(spec);

    ForcingSeries fs;
    fs.q_up.assign(horizon, base);
    fs.h_dn.assign(horizon, 0.0);

    // gamma-shaped pulses, crest at the slot center, well separated
    const double t_lo = 0.12 * static_cast<double>(horizon);
    const double span = 0.76 * static_cast<double>(horizon);
    for (int e = 0; e < spec.event_count; ++e) {
        const double slot = span / spec.event_count;
        const double crest_t = t_lo + slot * (e + 0.3 + 0.4 * rng.uniform());
        const double peak = rng.uniform(spec.peak_lo_m3s, spec.peak_hi_m3s);
        const double tp = rng.uniform(18.0, 36.0);   // hours to crest
        const double shape = rng.uniform(2.5, 4.5);
        const double start = crest_t - tp;
        for (std::size_t t = 0; t < horizon; ++t) {
            const double tau = static_cast<double>(t) - start;
            if (tau <= 0.0) continue;
            const double u = tau / tp;
            fs.q_up[t] += peak * std::pow(u, shape) * std::exp(shape * (1.0 - u));
        }
    }

    // provisional boundary stage: quasi-steady normal stage of q_up
    const auto secs = detail::section_geometry(reach, oracle_cfg.min_slope);
    const auto& last = secs.back();
    for (std::size_t t = 0; t < horizon; ++t)
        fs.h_dn[t] = last.z_bed + normal_depth(fs.q_up[t], last.width, last.slope, last.n);

    // replace with the normal stage of the routed outflow, plus slow noise
    const StateField pass1 = route_reach(reach, fs, oracle_cfg);
    const double amp = 0.03;
    double a[3], period[3], phase[3];
    for (int j = 0; j < 3; ++j) {
        a[j] = amp * (0.5 + 0.5 * rng.uniform()) / (j + 1);
        period[j] = rng.uniform(180.0, 700.0);
        phase[j] = rng.uniform(0.0, 6.283185307179586);
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        const double q_out = pass1.q.at2(t, reach.size() - 1);
        double noise = 0.0;
        for (int j = 0; j < 3; ++j)
            noise += a[j] * std::sin(6.283185307179586 * t / period[j] + phase[j]);
        fs.h_dn[t] = last.z_bed + normal_depth(q_out, last.width, last.slope, last.n) + noise;
    }
    fs.validate();
    return fs;
}

} // namespace reachcast

#endif // REACHCAST_SYNTHETIC_HPP
