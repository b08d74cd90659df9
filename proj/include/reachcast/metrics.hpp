#ifndef REACHCAST_METRICS_HPP
#define REACHCAST_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "reachcast/state.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

/// Root mean square error over paired series.
inline double rmse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw ConfigError("rmse: series must be equal-length and non-empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(pred.size()));
}

inline double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw ConfigError("mae: series must be equal-length and non-empty");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return acc / static_cast<double>(pred.size());
}

/// Nash-Sutcliffe efficiency, 1 - sum(err^2)/sum((truth - mean)^2).
/// Undefined (nullopt) when the truth is constant.
inline std::optional<double> nse(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size() || pred.empty())
        throw ConfigError("nse: series must be equal-length and non-empty");
    double mean = 0.0;
    for (double v : truth) mean += v;
    mean /= static_cast<double>(truth.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - truth[i];
        num += e * e;
        const double a = truth[i] - mean;
        den += a * a;
    }
    if (den == 0.0) return std::nullopt;
    return 1.0 - num / den;
}

/// Linearly interpolated quantile (q in [0,1]) of an unsorted sample.
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ConfigError("quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

struct VariableMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> nse;       // aggregate over all (t, xs) pairs
    double abs_err_median = 0.0;
    double abs_err_mean = 0.0;
    double abs_err_p90 = 0.0;
};

/**
 * Full evaluation of a predicted field against the truth, warmup rows
 * excluded. Stage errors are additionally reported in feet for side-by-side
 * comparison with imperial-unit studies; SI is canonical.
 */
struct MetricsReport {
    std::string reach_id;
    std::size_t steps_evaluated = 0;
    std::size_t sections = 0;
    std::size_t warmup_skipped = 0;
    VariableMetrics stage;     // H [m]
    VariableMetrics discharge; // Q [m^3/s]
    double stage_abs_err_median_ft = 0.0;
    double stage_abs_err_mean_ft = 0.0;
    double stage_abs_err_p90_ft = 0.0;
    std::vector<std::optional<double>> nse_h_per_xs; // over time, per section
    std::vector<std::optional<double>> nse_q_per_xs;
};

inline MetricsReport evaluate_reach(const StateField& pred, const StateField& truth,
                                    std::size_t warmup_rows) {
    if (pred.steps() != truth.steps() || pred.sections() != truth.sections())
        throw ConfigError("evaluate_reach: shape mismatch");
    if (pred.steps() <= warmup_rows)
        throw ConfigError("evaluate_reach: nothing left after warmup exclusion");

    const std::size_t t0 = warmup_rows;
    const std::size_t steps = pred.steps() - warmup_rows;
    const std::size_t n = pred.sections();

    MetricsReport rep;
    rep.reach_id = truth.reach_id.empty() ? pred.reach_id : truth.reach_id;
    rep.steps_evaluated = steps;
    rep.sections = n;
    rep.warmup_skipped = warmup_rows;

    std::vector<double> ph, th, pq, tq;
    ph.reserve(steps * n);
    th.reserve(steps * n);
    pq.reserve(steps * n);
    tq.reserve(steps * n);
    for (std::size_t t = t0; t < pred.steps(); ++t)
        for (std::size_t i = 0; i < n; ++i) {
            ph.push_back(pred.h.at2(t, i));
            th.push_back(truth.h.at2(t, i));
            pq.push_back(pred.q.at2(t, i));
            tq.push_back(truth.q.at2(t, i));
        }

    auto fill_var = [](VariableMetrics& vm, const std::vector<double>& p,
                       const std::vector<double>& t) {
        vm.rmse = rmse(p, t);
        vm.mae = mae(p, t);
        vm.nse = nse(p, t);
        std::vector<double> abs_err(p.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            abs_err[i] = std::abs(p[i] - t[i]);
            mean += abs_err[i];
        }
        vm.abs_err_mean = mean / static_cast<double>(p.size());
        vm.abs_err_median = quantile(abs_err, 0.5);
        vm.abs_err_p90 = quantile(std::move(abs_err), 0.9);
    };
    fill_var(rep.stage, ph, th);
    fill_var(rep.discharge, pq, tq);

    rep.stage_abs_err_median_ft = rep.stage.abs_err_median * kFeetPerMetre;
    rep.stage_abs_err_mean_ft = rep.stage.abs_err_mean * kFeetPerMetre;
    rep.stage_abs_err_p90_ft = rep.stage.abs_err_p90 * kFeetPerMetre;

    rep.nse_h_per_xs.resize(n);
    rep.nse_q_per_xs.resize(n);
    std::vector<double> pcol(steps), tcol(steps);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < steps; ++t) {
            pcol[t] = pred.h.at2(t0 + t, i);
            tcol[t] = truth.h.at2(t0 + t, i);
        }
        rep.nse_h_per_xs[i] = nse(pcol, tcol);
        for (std::size_t t = 0; t < steps; ++t) {
            pcol[t] = pred.q.at2(t0 + t, i);
            tcol[t] = truth.q.at2(t0 + t, i);
        }
        rep.nse_q_per_xs[i] = nse(pcol, tcol);
    }
    return rep;
}

/// Median of the per-section stage NSE values (missing entries skipped).
inline std::optional<double> median_stage_nse(const MetricsReport& rep) {
    std::vector<double> vals;
    for (const auto& v : rep.nse_h_per_xs)
        if (v) vals.push_back(*v);
    if (vals.empty()) return std::nullopt;
    return quantile(std::move(vals), 0.5);
}

/// |max(pred H) - max(true H)| at one section over a window of rows.
inline double peak_stage_error(const StateField& pred, const StateField& truth,
                               std::size_t xs_index, std::size_t row_begin,
                               std::size_t row_end) {
    if (xs_index >= pred.sections() || row_end > pred.steps() || row_begin >= row_end)
        throw ConfigError("peak_stage_error: bad window");
    double mp = -std::numeric_limits<double>::infinity();
    double mt = -std::numeric_limits<double>::infinity();
    for (std::size_t t = row_begin; t < row_end; ++t) {
        mp = std::max(mp, pred.h.at2(t, xs_index));
        mt = std::max(mt, truth.h.at2(t, xs_index));
    }
    return std::abs(mp - mt);
}

/// CSV of per-section NSE, for the per-cross-section skill plot.
inline std::string per_xs_nse_csv(const MetricsReport& rep) {
    std::ostringstream out;
    out.precision(10);
    out << "xs_index,nse_h,nse_q\n";
    for (std::size_t i = 0; i < rep.nse_h_per_xs.size(); ++i) {
        out << i << ",";
        if (rep.nse_h_per_xs[i]) out << *rep.nse_h_per_xs[i];
        out << ",";
        if (rep.nse_q_per_xs[i]) out << *rep.nse_q_per_xs[i];
        out << "\n";
    }
    return out.str();
}

/// CSV of the absolute stage-error distribution (percentile table, metres
/// and feet), for the error-histogram plot.
inline std::string stage_error_distribution_csv(const StateField& pred,
                                                const StateField& truth,
                                                std::size_t warmup_rows) {
    std::vector<double> abs_err;
    for (std::size_t t = warmup_rows; t < pred.steps(); ++t)
        for (std::size_t i = 0; i < pred.sections(); ++i)
            abs_err.push_back(std::abs(pred.h.at2(t, i) - truth.h.at2(t, i)));
    std::sort(abs_err.begin(), abs_err.end());
    std::ostringstream out;
    out.precision(10);
    out << "percentile,abs_stage_err_m,abs_stage_err_ft\n";
    for (int p = 0; p <= 100; ++p) {
        const double pos = p / 100.0 * static_cast<double>(abs_err.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, abs_err.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        const double v = abs_err[lo] * (1.0 - frac) + abs_err[hi] * frac;
        out << p << "," << v << "," << v * kFeetPerMetre << "\n";
    }
    return out.str();
}

} // namespace reachcast

#endif // REACHCAST_METRICS_HPP
