#ifndef REACHCAST_ABLATION_HPP
#define REACHCAST_ABLATION_HPP

#include <string>
#include <vector>

#include "reachcast/metrics.hpp"
#include "reachcast/pipeline.hpp"
#include "reachcast/rollout.hpp"

namespace reachcast {

struct AblationConfig {
    ModelConfig model;
    TrainConfig train;
    std::size_t rollout_horizon = 240;
};

namespace detail {

/// Train on the given years, roll out on the held-out year, evaluate.
inline MetricsReport train_and_evaluate(const Dataset& ds, const AblationConfig& cfg,
                                        const ChannelMask& mask,
                                        std::vector<std::size_t> years,
                                        StateField* pred_out = nullptr) {
    TrainData data = ds.train_data(std::move(years));
    TrainResult r = train_reach(data, cfg.model, mask, cfg.train);
    const std::size_t seq_len = cfg.model.seq_len;
    StateField warm = warmup_rows(ds.holdout.truth, seq_len);
    RolloutResult res = rollout(r.params, cfg.model, mask, r.stats, ds.reach, ds.static4,
                                ds.holdout.forcings, warm, cfg.rollout_horizon);
    StateField truth = truth_window(ds.holdout.truth, seq_len + cfg.rollout_horizon);
    if (pred_out) *pred_out = res.pred;
    return evaluate_reach(res.pred, truth, seq_len);
}

} // namespace detail

// ---------------------------------------------------------------------------
// feature ablation: full channel set vs a masked variant, identical data/seed
// ---------------------------------------------------------------------------

struct FeatureAblationResult {
    MetricsReport full;
    MetricsReport ablated;
    std::vector<std::string> dropped;
};

/// Trains a pair of otherwise-identical models (the ablated one with the
/// named channels removed from the encoder input), rolls both out on the
/// held-out year and reports both. Dropping H or Q is rejected.
inline FeatureAblationResult ablate_features(const Dataset& ds,
                                             const std::vector<std::string>& channels_to_drop,
                                             const AblationConfig& cfg) {
    FeatureAblationResult out;
    out.dropped = channels_to_drop;
    const ChannelMask ablated_mask = ChannelMask::dropping(channels_to_drop); // validates
    out.full = detail::train_and_evaluate(ds, cfg, ChannelMask::full(), {});
    out.ablated = detail::train_and_evaluate(ds, cfg, ablated_mask, {});
    return out;
}

// ---------------------------------------------------------------------------
// data-volume ablation: training corpora of different completeness, shared
// evaluation rollout
// ---------------------------------------------------------------------------

struct DataVolumeArm {
    std::string name;
    std::vector<std::size_t> years; // indices into Dataset::train
};

struct DataVolumeResult {
    std::string name;
    MetricsReport report;
    double peak_stage_error = 0.0; // |max pred H - max true H| at the gauge
};

/// The year holding the largest training flood pulse.
inline std::size_t largest_event_year(const Dataset& ds) {
    std::size_t best = 0;
    double best_peak = -1.0;
    for (std::size_t y = 0; y < ds.train.size(); ++y) {
        for (double q : ds.train[y].forcings.q_up)
            if (q > best_peak) {
                best_peak = q;
                best = y;
            }
    }
    return best;
}

/// Default protocol arms: one corpus excluding the largest flood event, one
/// including everything.
inline std::vector<DataVolumeArm> default_data_volume_arms(const Dataset& ds) {
    const std::size_t big = largest_event_year(ds);
    DataVolumeArm without{"excl-largest-event", {}};
    DataVolumeArm with_all{"full-corpus", {}};
    for (std::size_t y = 0; y < ds.train.size(); ++y) {
        with_all.years.push_back(y);
        if (y != big) without.years.push_back(y);
    }
    if (without.years.empty())
        throw ConfigError("data-volume ablation needs at least two training years");
    return {without, with_all};
}

/// Every arm trains its own model and is evaluated on the identical held-out
/// extreme-event rollout; the peak-stage error is measured at the gauge
/// section over the evaluated (post-warmup) window.
inline std::vector<DataVolumeResult> ablate_data_volume(const Dataset& ds,
                                                        const std::vector<DataVolumeArm>& arms,
                                                        const AblationConfig& cfg,
                                                        std::size_t gauge_xs) {
    std::vector<DataVolumeResult> results;
    const std::size_t seq_len = cfg.model.seq_len;
    StateField truth = truth_window(ds.holdout.truth, seq_len + cfg.rollout_horizon);
    for (const auto& arm : arms) {
        DataVolumeResult r;
        r.name = arm.name;
        StateField pred;
        r.report = detail::train_and_evaluate(ds, cfg, ChannelMask::full(), arm.years, &pred);
        r.peak_stage_error =
            peak_stage_error(pred, truth, gauge_xs, seq_len, truth.steps());
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace reachcast

#endif // REACHCAST_ABLATION_HPP
