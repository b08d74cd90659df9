#ifndef REACHCAST_ROLLOUT_HPP
#define REACHCAST_ROLLOUT_HPP

#include <functional>
#include <optional>

#include "reachcast/model.hpp"

namespace reachcast {

struct RolloutConfig {
    std::size_t horizon = 240; // predicted steps after warmup

    void validate() const {
        if (horizon < 1) throw ConfigError("RolloutConfig: horizon must be >= 1");
    }
};

struct RolloutResult {
    StateField pred;                        // warmup truth rows, then predictions
    std::optional<std::size_t> first_oob_step; // first step with stage > bank + 10 m
};

/// Hook for instrumentation: receives each physical (denormalized) window
/// before the forward call, with the rollout step index (0-based).
using WindowObserver = std::function<void(std::size_t, const Tensor<double>&)>;

/**
 * Closed-loop autoregressive forecast. The history buffer starts from the
 * first L hours of ground truth, every later entry is the model's own
 * prediction fed back; the boundary channels always come from the true
 * forcings, anchoring the loop. A non-finite prediction aborts with the
 * step index; stage more than 10 m above the bank top is recorded as a
 * first-failure step and the rollout continues.
 */
template <std::floating_point T>
RolloutResult rollout(const ModelParams<T>& params, const ModelConfig& model_cfg,
                      const ChannelMask& mask, const NormStats& stats,
                      const Reach& reach, const Tensor<double>& static4,
                      const ForcingSeries& forcings, const StateField& warmup_truth,
                      std::size_t horizon, const WindowObserver& observer = {}) {
    RolloutConfig rc{horizon};
    rc.validate();
    stats.require_fitted();
    const std::size_t seq_len = model_cfg.seq_len;
    const std::size_t n = reach.size();
    if (warmup_truth.steps() < seq_len)
        throw ConfigError("rollout: warmup truth must cover the first " +
                          std::to_string(seq_len) + " hours");
    if (warmup_truth.sections() != n) throw ConfigError("rollout: warmup section count mismatch");
    if (forcings.length() < seq_len + horizon)
        throw ConfigError("rollout: forcings must cover warmup + horizon hours");

    RolloutResult result;
    result.pred.reach_id = reach.id;
    result.pred.dt = forcings.dt;
    result.pred.resize(seq_len + horizon, n);
    for (std::size_t t = 0; t < seq_len; ++t)
        for (std::size_t i = 0; i < n; ++i) {
            result.pred.h.at2(t, i) = warmup_truth.h.at2(t, i);
            result.pred.q.at2(t, i) = warmup_truth.q.at2(t, i);
        }

    Tensor<double> window({1, seq_len, n, kNumChannels});
    Tensor<T> window_t;

    for (std::size_t step = 0; step < horizon; ++step) {
        const std::size_t t_end = seq_len + step;
        // window over [t_end - L, t_end): history rows are predictions once
        // step > 0, boundary channels are the true forcings
        for (std::size_t l = 0; l < seq_len; ++l) {
            const std::size_t tau = t_end - seq_len + l;
            for (std::size_t i = 0; i < n; ++i) {
                double* row = window.data() + ((l * n) + i) * kNumChannels;
                row[0] = result.pred.h.at2(tau, i);
                row[1] = result.pred.q.at2(tau, i);
                row[2] = static4.at2(i, 0);
                row[3] = static4.at2(i, 1);
                row[4] = static4.at2(i, 2);
                row[5] = static4.at2(i, 3);
                row[6] = forcings.q_up[tau];
                row[7] = forcings.h_dn[tau];
            }
        }
        if (observer) observer(step, window);

        Tensor<double> norm = window;
        normalize(norm, stats);
        window_t = norm.template cast<T>();
        Tensor<T> pred_n = model_forward(params, model_cfg, mask, window_t, reach.x_coord);
        Tensor<double> pred = pred_n.template cast<double>();
        denormalize_state(pred, stats);

        for (std::size_t i = 0; i < n; ++i) {
            const double hv = pred.at3(0, i, 0);
            const double qv = pred.at3(0, i, 1);
            if (!std::isfinite(hv) || !std::isfinite(qv))
                throw NumericError("rollout: non-finite prediction at step " +
                                       std::to_string(step),
                                   static_cast<long>(step));
            if (!result.first_oob_step && hv > reach.xs[i].z_bank + 10.0)
                result.first_oob_step = step;
            result.pred.h.at2(t_end, i) = hv;
            result.pred.q.at2(t_end, i) = qv;
        }
    }
    return result;
}

} // namespace reachcast

#endif // REACHCAST_ROLLOUT_HPP
