#ifndef REACHCAST_PIPELINE_HPP
#define REACHCAST_PIPELINE_HPP

#include <cstdint>
#include <vector>

#include "reachcast/synthetic.hpp"
#include "reachcast/training.hpp"

namespace reachcast {

/**
 * Desk-scale stand-in for a multi-year simulation archive: one synthetic
 * reach, train_years independently forced "years", and one held-out year
 * whose flood pulses are scaled up so the evaluation probes extrapolation.
 */
struct DatasetSpec {
    SyntheticSpec base;        // reach recipe and per-year forcing template
    std::size_t train_years = 2;
    double holdout_peak_factor = 1.3;

    void validate() const {
        base.validate();
        if (train_years < 1) throw ConfigError("DatasetSpec: need at least one training year");
        if (!(holdout_peak_factor > 0)) throw ConfigError("DatasetSpec: bad holdout factor");
    }
};

struct Dataset {
    Reach reach;
    Tensor<double> static4;
    std::vector<TrainSeries> train; // one entry per year
    TrainSeries holdout;

    TrainData train_data(std::vector<std::size_t> year_subset = {}) const {
        TrainData d;
        d.reach = reach;
        d.static4 = static4;
        if (year_subset.empty())
            d.series = train;
        else
            for (std::size_t idx : year_subset) d.series.push_back(train.at(idx));
        return d;
    }
};

/// Per-year forcing seeds derive deterministically from the base seed.
inline std::uint64_t year_seed(std::uint64_t base_seed, std::size_t year) {
    return base_seed + 1000ull * (year + 1);
}

inline std::uint64_t holdout_seed(std::uint64_t base_seed) { return base_seed + 777ull; }

inline Dataset build_dataset(const DatasetSpec& spec, const OracleConfig& oracle = {}) {
    spec.validate();
    Dataset ds;
    ds.reach = gen_synthetic_reach(spec.base);
    ds.static4 = static_features(ds.reach);
    for (std::size_t y = 0; y < spec.train_years; ++y) {
        SyntheticSpec ys = spec.base;
        ys.seed = year_seed(spec.base.seed, y);
        TrainSeries sr;
        sr.forcings = gen_synthetic_forcings(ys, ds.reach, oracle);
        sr.truth = route_reach(ds.reach, sr.forcings, oracle);
        ds.train.push_back(std::move(sr));
    }
    SyntheticSpec hs = spec.base;
    hs.seed = holdout_seed(spec.base.seed);
    hs.peak_lo_m3s *= spec.holdout_peak_factor;
    hs.peak_hi_m3s *= spec.holdout_peak_factor;
    ds.holdout.forcings = gen_synthetic_forcings(hs, ds.reach, oracle);
    ds.holdout.truth = route_reach(ds.reach, ds.holdout.forcings, oracle);
    return ds;
}

/// First L hours of a truth field, the autoregressive warm start.
inline StateField warmup_rows(const StateField& truth, std::size_t seq_len) {
    StateField w;
    w.reach_id = truth.reach_id;
    w.dt = truth.dt;
    w.resize(seq_len, truth.sections());
    for (std::size_t t = 0; t < seq_len; ++t)
        for (std::size_t i = 0; i < truth.sections(); ++i) {
            w.h.at2(t, i) = truth.h.at2(t, i);
            w.q.at2(t, i) = truth.q.at2(t, i);
        }
    return w;
}

/// Truth truncated to the rollout length (warmup + horizon rows).
inline StateField truth_window(const StateField& truth, std::size_t rows) {
    if (rows > truth.steps()) throw ConfigError("truth_window: not enough rows");
    StateField w;
    w.reach_id = truth.reach_id;
    w.dt = truth.dt;
    w.resize(rows, truth.sections());
    for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t i = 0; i < truth.sections(); ++i) {
            w.h.at2(t, i) = truth.h.at2(t, i);
            w.q.at2(t, i) = truth.q.at2(t, i);
        }
    return w;
}

} // namespace reachcast

#endif // REACHCAST_PIPELINE_HPP
