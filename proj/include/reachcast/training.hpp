#ifndef REACHCAST_TRAINING_HPP
#define REACHCAST_TRAINING_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reachcast/adamw.hpp"
#include "reachcast/model.hpp"
#include "reachcast/oracle.hpp"
#include "reachcast/rng.hpp"

namespace reachcast {

struct TrainConfig {
    int epochs = 60;
    double lr = 2e-4;
    int batch_size = 16;
    double lambda_smooth = 0.0; // spatial first-difference penalty weight
    double val_fraction = 0.2;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;

    void validate() const {
        if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
        if (val_fraction < 0.0 || val_fraction >= 1.0)
            throw ConfigError("TrainConfig: val_fraction must be in [0, 1)");
        if (lambda_smooth < 0.0) throw ConfigError("TrainConfig: lambda must be >= 0");
        if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
        if (!(lr > 0.0)) throw ConfigError("TrainConfig: lr must be positive");
    }
};

struct EpochStats {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0; // NaN when no validation split
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = 0; // 1-based; 0 = final epoch used (no validation)
};

/// One ground-truth year: boundary forcings plus the oracle-routed state.
struct TrainSeries {
    ForcingSeries forcings;
    StateField truth;
};

struct TrainData {
    Reach reach;
    Tensor<double> static4; // [N, 4] from static_features(reach)
    std::vector<TrainSeries> series;
};

/// (series, t_end) handle of one supervised window.
struct SampleRef {
    std::size_t series = 0;
    std::size_t t_end = 0;
};

/// Windows for one series of length total_hours: t_end in [L, T-1], so the
/// sample count is T - L.
inline std::vector<std::size_t> make_window_ends(std::size_t total_hours, std::size_t seq_len) {
    if (total_hours < seq_len + 1)
        throw ConfigError("make_window_ends: series too short (need T >= L+1)");
    std::vector<std::size_t> ends;
    ends.reserve(total_hours - seq_len);
    for (std::size_t t = seq_len; t < total_hours; ++t) ends.push_back(t);
    return ends;
}

inline std::vector<SampleRef> all_samples(const TrainData& data, std::size_t seq_len) {
    std::vector<SampleRef> out;
    for (std::size_t s = 0; s < data.series.size(); ++s) {
        for (std::size_t t : make_window_ends(data.series[s].truth.steps(), seq_len))
            out.push_back({s, t});
    }
    return out;
}

/// Temporal split: validation is the final contiguous fraction, no shuffle
/// across the boundary.
inline std::pair<std::vector<SampleRef>, std::vector<SampleRef>> split_train_val(
    const std::vector<SampleRef>& samples, double val_fraction) {
    if (samples.size() < 2) throw ConfigError("split_train_val: need at least 2 samples");
    const std::size_t n_val =
        static_cast<std::size_t>(static_cast<double>(samples.size()) * val_fraction + 1e-9);
    const std::size_t n_train = samples.size() - n_val;
    if (n_train == 0) throw ConfigError("split_train_val: empty training split");
    return {std::vector<SampleRef>(samples.begin(), samples.begin() + n_train),
            std::vector<SampleRef>(samples.begin() + n_train, samples.end())};
}

/**
 * Fit per-channel statistics from the training samples only: for each series
 * the dynamic rows up to (and including) the last training target hour, and
 * the static columns of the geometry table. Validation/test hours never enter.
 */
inline NormStats fit_norm_stats(const TrainData& data,
                                const std::vector<SampleRef>& train_samples) {
    std::vector<std::size_t> cutoff(data.series.size(), 0); // rows [0, cutoff)
    for (const auto& s : train_samples)
        cutoff[s.series] = std::max(cutoff[s.series], s.t_end + 1);

    std::array<double, kNumChannels> sum{}, sumsq{};
    std::array<std::size_t, kNumChannels> count{};

    auto add = [&](std::size_t ch, double v) {
        sum[ch] += v;
        sumsq[ch] += v * v;
        count[ch] += 1;
    };

    const std::size_t n = data.reach.size();
    for (std::size_t si = 0; si < data.series.size(); ++si) {
        const auto& sr = data.series[si];
        for (std::size_t t = 0; t < cutoff[si]; ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                add(0, sr.truth.h.at2(t, i));
                add(1, sr.truth.q.at2(t, i));
            }
            add(6, sr.forcings.q_up[t]);
            add(7, sr.forcings.h_dn[t]);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 4; ++c) add(2 + c, data.static4.at2(i, c));

    NormStats stats;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        if (count[c] == 0) throw ConfigError("fit_norm_stats: no training rows");
        const double mean = sum[c] / static_cast<double>(count[c]);
        const double var = std::max(sumsq[c] / static_cast<double>(count[c]) - mean * mean, 0.0);
        stats.mean[c] = mean;
        stats.stddev[c] = std::max(std::sqrt(var), NormStats::kSigmaFloor);
    }
    stats.fitted = true;
    return stats;
}

/**
 * MSE over all elements plus an optional spatial smoothness penalty:
 * lambda * mean over (sample, channel) of the summed squared first
 * differences along the sections. lambda = 0 is the plain training
 * objective.
 */
template <std::floating_point T>
double loss_forward(const Tensor<T>& pred, const Tensor<T>& target, double lambda) {
    if (!pred.same_shape(target)) throw ConfigError("loss: shape mismatch");
    const std::size_t b = pred.dim(0), n = pred.dim(1), c = pred.dim(2);
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(pred.size());
    if (lambda == 0.0) return mse;

    double smooth = 0.0;
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t ni = 0; ni + 1 < n; ++ni) {
                const double d = static_cast<double>(pred.at3(bi, ni + 1, ci)) -
                                 static_cast<double>(pred.at3(bi, ni, ci));
                smooth += d * d;
            }
    smooth /= static_cast<double>(b * c);
    return mse + lambda * smooth;
}

template <std::floating_point T>
void loss_backward(const Tensor<T>& pred, const Tensor<T>& target, double lambda,
                   Tensor<T>& dpred) {
    const std::size_t b = pred.dim(0), n = pred.dim(1), c = pred.dim(2);
    if (!dpred.same_shape(pred)) dpred.resize(pred.shape());
    const double scale = 2.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i)
        dpred[i] = static_cast<T>(scale * (static_cast<double>(pred[i]) -
                                           static_cast<double>(target[i])));
    if (lambda == 0.0) return;
    const double s = 2.0 * lambda / static_cast<double>(b * c);
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t ni = 0; ni + 1 < n; ++ni) {
                const double d = static_cast<double>(pred.at3(bi, ni + 1, ci)) -
                                 static_cast<double>(pred.at3(bi, ni, ci));
                dpred.at3(bi, ni + 1, ci) += static_cast<T>(s * d);
                dpred.at3(bi, ni, ci) -= static_cast<T>(s * d);
            }
}

namespace detail {

/// Normalized copies of every series plus the static table, so window
/// assembly during training is a pure copy.
struct NormalizedData {
    std::vector<StateField> state;     // normalized H, Q
    std::vector<ForcingSeries> forc;   // normalized Q_up, H_dn
    Tensor<double> static4;            // normalized columns
};

inline NormalizedData normalize_data(const TrainData& data, const NormStats& stats) {
    NormalizedData nd;
    nd.static4 = data.static4;
    const std::size_t n = data.reach.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 4; ++c)
            nd.static4.at2(i, c) =
                (nd.static4.at2(i, c) - stats.mean[2 + c]) / stats.stddev[2 + c];
    for (const auto& sr : data.series) {
        StateField st = sr.truth;
        for (std::size_t i = 0; i < st.h.size(); ++i) {
            st.h[i] = (st.h[i] - stats.mean[0]) / stats.stddev[0];
            st.q[i] = (st.q[i] - stats.mean[1]) / stats.stddev[1];
        }
        nd.state.push_back(std::move(st));
        ForcingSeries fc = sr.forcings;
        for (std::size_t t = 0; t < fc.length(); ++t) {
            fc.q_up[t] = (fc.q_up[t] - stats.mean[6]) / stats.stddev[6];
            fc.h_dn[t] = (fc.h_dn[t] - stats.mean[7]) / stats.stddev[7];
        }
        nd.forc.push_back(std::move(fc));
    }
    return nd;
}

/// Assemble a normalized batch window [B, L, N, 8] and target [B, N, 2].
template <std::floating_point T>
void build_batch(const NormalizedData& nd, const std::vector<SampleRef>& samples,
                 std::size_t first, std::size_t count, std::size_t seq_len,
                 std::size_t n, Tensor<T>& window, Tensor<T>& target) {
    window.resize({count, seq_len, n, kNumChannels});
    target.resize({count, n, 2});
    for (std::size_t k = 0; k < count; ++k) {
        const SampleRef& s = samples[first + k];
        const StateField& st = nd.state[s.series];
        const ForcingSeries& fc = nd.forc[s.series];
        for (std::size_t l = 0; l < seq_len; ++l) {
            const std::size_t tau = s.t_end - seq_len + l;
            for (std::size_t i = 0; i < n; ++i) {
                T* row = window.data() + (((k * seq_len + l) * n) + i) * kNumChannels;
                row[0] = static_cast<T>(st.h.at2(tau, i));
                row[1] = static_cast<T>(st.q.at2(tau, i));
                row[2] = static_cast<T>(nd.static4.at2(i, 0));
                row[3] = static_cast<T>(nd.static4.at2(i, 1));
                row[4] = static_cast<T>(nd.static4.at2(i, 2));
                row[5] = static_cast<T>(nd.static4.at2(i, 3));
                row[6] = static_cast<T>(fc.q_up[tau]);
                row[7] = static_cast<T>(fc.h_dn[tau]);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            target.data()[(k * n + i) * 2 + 0] = static_cast<T>(st.h.at2(s.t_end, i));
            target.data()[(k * n + i) * 2 + 1] = static_cast<T>(st.q.at2(s.t_end, i));
        }
    }
}

} // namespace detail

struct TrainResult {
    ModelParams<double> params;
    NormStats stats;
    TrainReport report;
    ChannelMask mask;
    ModelConfig model_cfg;
};

/// Normalized-space one-step MSE of the persistence forecast (next hour =
/// current hour) over the given samples; the baseline a trained model must
/// beat.
inline double persistence_mse(const TrainData& data, const NormStats& stats,
                              const std::vector<SampleRef>& samples) {
    double acc = 0.0;
    std::size_t count = 0;
    const std::size_t n = data.reach.size();
    for (const auto& s : samples) {
        const auto& st = data.series[s.series].truth;
        for (std::size_t i = 0; i < n; ++i) {
            const double dh = (st.h.at2(s.t_end, i) - st.h.at2(s.t_end - 1, i)) / stats.stddev[0];
            const double dq = (st.q.at2(s.t_end, i) - st.q.at2(s.t_end - 1, i)) / stats.stddev[1];
            acc += dh * dh + dq * dq;
            count += 2;
        }
    }
    return acc / static_cast<double>(count);
}

/**
 * Windowed one-step training of a single reach model: temporal split,
 * train-only normalization stats, shuffled mini-batches, AdamW, best
 * validation checkpoint (final parameters when the validation split is
 * empty). Deterministic for a given config seed.
 */
inline TrainResult train_reach(const TrainData& data, const ModelConfig& model_cfg,
                               const ChannelMask& mask, const TrainConfig& cfg) {
    cfg.validate();
    model_cfg.validate();
    const std::size_t seq_len = model_cfg.seq_len;
    const std::size_t n = data.reach.size();

    auto samples = all_samples(data, seq_len);
    auto [train_samples, val_samples] = split_train_val(samples, cfg.val_fraction);
    NormStats stats = fit_norm_stats(data, train_samples);
    auto nd = detail::normalize_data(data, stats);

    const std::size_t k_max = mode_count(n, model_cfg.max_modes);
    Rng root(cfg.seed);
    ModelParams<double> params =
        init_model_params<double>(model_cfg, mask.kept_count(), k_max, root.fork(1));
    Rng shuffle_rng = root.fork(2);

    auto param_ptrs = params.tensors();
    auto opt_state = adamw_init<double>(std::as_const(params).tensors());
    AdamWConfig<double> opt_cfg;
    opt_cfg.lr = cfg.lr;
    opt_cfg.beta1 = cfg.beta1;
    opt_cfg.beta2 = cfg.beta2;
    opt_cfg.eps = cfg.eps;
    opt_cfg.weight_decay = cfg.weight_decay;

    ModelParams<double> grads = params.zeros_like();
    auto grad_ptrs_mut = grads.tensors();
    std::vector<const Tensor<double>*> grad_ptrs(grad_ptrs_mut.begin(), grad_ptrs_mut.end());

    TrainResult result;
    result.stats = stats;
    result.mask = mask;
    result.model_cfg = model_cfg;

    std::vector<std::size_t> order(train_samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<SampleRef> shuffled(train_samples.size());

    ModelParams<double> best_params;
    double best_val = std::numeric_limits<double>::infinity();

    Tensor<double> window, target, pred, dpred;
    ForwardCache<double> cache;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(order);
        for (std::size_t i = 0; i < order.size(); ++i) shuffled[i] = train_samples[order[i]];

        double train_loss_acc = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < shuffled.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t bsz =
                std::min<std::size_t>(cfg.batch_size, shuffled.size() - start);
            detail::build_batch(nd, shuffled, start, bsz, seq_len, n, window, target);
            pred = model_forward(params, model_cfg, mask, window, data.reach.x_coord, &cache);
            const double batch_loss = loss_forward(pred, target, cfg.lambda_smooth);
            if (!std::isfinite(batch_loss))
                throw NumericError("train_reach: loss diverged at epoch " +
                                       std::to_string(epoch),
                                   epoch);
            train_loss_acc += batch_loss * static_cast<double>(bsz);
            seen += bsz;
            loss_backward(pred, target, cfg.lambda_smooth, dpred);
            grads.zero();
            model_backward(params, model_cfg, mask, cache, dpred, grads);
            adamw_step(param_ptrs, grad_ptrs, opt_state, opt_cfg);
        }

        double val_loss = std::numeric_limits<double>::quiet_NaN();
        if (!val_samples.empty()) {
            double acc = 0.0;
            for (std::size_t start = 0; start < val_samples.size();
                 start += static_cast<std::size_t>(cfg.batch_size)) {
                const std::size_t bsz =
                    std::min<std::size_t>(cfg.batch_size, val_samples.size() - start);
                detail::build_batch(nd, val_samples, start, bsz, seq_len, n, window, target);
                pred = model_forward(params, model_cfg, mask, window, data.reach.x_coord);
                acc += loss_forward(pred, target, cfg.lambda_smooth) *
                       static_cast<double>(bsz);
            }
            val_loss = acc / static_cast<double>(val_samples.size());
            if (!std::isfinite(val_loss))
                throw NumericError("train_reach: validation loss diverged at epoch " +
                                       std::to_string(epoch),
                                   epoch);
            if (val_loss < best_val) {
                best_val = val_loss;
                best_params = params;
                result.report.best_epoch = epoch;
            }
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpochStats es;
        es.epoch = epoch;
        es.train_loss = train_loss_acc / static_cast<double>(seen);
        es.val_loss = val_loss;
        es.seconds = std::chrono::duration<double>(t1 - t0).count();
        result.report.epochs.push_back(es);
    }

    result.params = val_samples.empty() ? std::move(params) : std::move(best_params);
    return result;
}

} // namespace reachcast

#endif // REACHCAST_TRAINING_HPP
