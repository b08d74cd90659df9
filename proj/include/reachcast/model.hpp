#ifndef REACHCAST_MODEL_HPP
#define REACHCAST_MODEL_HPP

#include <array>
#include <string>
#include <vector>

#include "reachcast/forcings.hpp"
#include "reachcast/geometry.hpp"
#include "reachcast/gru.hpp"
#include "reachcast/layers.hpp"
#include "reachcast/spectral.hpp"
#include "reachcast/state.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

inline constexpr std::size_t kNumChannels = 8;

/// Canonical feature-channel order. Every window tensor uses this layout;
/// ablation masks select a subset without reordering.
inline const std::array<std::string, kNumChannels>& channel_layout() {
    static const std::array<std::string, kNumChannels> names = {
        "H", "Q", "z_bed", "z_bank", "n_man", "x_coord", "Q_up", "H_dn"};
    return names;
}

inline std::size_t channel_index(const std::string& name) {
    const auto& names = channel_layout();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw ConfigError("unknown channel '" + name + "'");
}

/// Which of the 8 canonical channels feed the encoder. The dynamic state
/// channels (H, Q) can never be dropped.
struct ChannelMask {
    std::array<bool, kNumChannels> keep{true, true, true, true, true, true, true, true};

    static ChannelMask full() { return {}; }

    static ChannelMask dropping(const std::vector<std::string>& names) {
        ChannelMask m;
        for (const auto& n : names) {
            const std::size_t idx = channel_index(n);
            if (idx <= 1)
                throw ConfigError("cannot drop dynamic channel '" + n + "'");
            m.keep[idx] = false;
        }
        return m;
    }

    std::size_t kept_count() const {
        std::size_t c = 0;
        for (bool k : keep) c += k;
        return c;
    }

    std::vector<std::size_t> kept_indices() const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < kNumChannels; ++i)
            if (keep[i]) idx.push_back(i);
        return idx;
    }

    std::vector<std::string> dropped_names() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < kNumChannels; ++i)
            if (!keep[i]) out.push_back(channel_layout()[i]);
        return out;
    }

    bool operator==(const ChannelMask&) const = default;
};

struct ModelConfig {
    std::size_t hidden = 96;
    std::size_t max_modes = 48;
    std::size_t seq_len = 12; // L, history hours per window
    std::size_t fno_blocks = 1;

    void validate() const {
        if (hidden == 0 || max_modes == 0 || seq_len == 0 || fno_blocks == 0)
            throw ConfigError("ModelConfig: all dimensions must be positive");
    }
};

/// Retained Fourier modes adapt to the reach length, capped by the config.
inline std::size_t mode_count(std::size_t n_xs, std::size_t max_modes) {
    if (n_xs < 3) throw ConfigError("mode_count: need at least 3 cross-sections");
    return std::min(max_modes, n_xs / 2 + 1);
}

/**
 * Per-channel normalization statistics in physical units, fitted from the
 * training rows only. Standard deviations are floored (constant channels,
 * e.g. uniform roughness, normalize to zero rather than dividing by zero).
 */
struct NormStats {
    std::array<double, kNumChannels> mean{};
    std::array<double, kNumChannels> stddev{};
    bool fitted = false;

    static constexpr double kSigmaFloor = 1e-6;

    void require_fitted() const {
        if (!fitted) throw ConfigError("NormStats: not fitted");
    }
};

/// x_hat = (x - mu_c) / sigma_c on a [..., 8] tensor.
template <std::floating_point T>
void normalize(Tensor<T>& x, const NormStats& stats) {
    stats.require_fitted();
    const std::size_t c = kNumChannels;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t ch = i % c;
        x[i] = static_cast<T>((static_cast<double>(x[i]) - stats.mean[ch]) / stats.stddev[ch]);
    }
}

template <std::floating_point T>
void denormalize(Tensor<T>& x, const NormStats& stats) {
    stats.require_fitted();
    const std::size_t c = kNumChannels;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const std::size_t ch = i % c;
        x[i] = static_cast<T>(static_cast<double>(x[i]) * stats.stddev[ch] + stats.mean[ch]);
    }
}

/// Same for a [..., 2] state tensor (channels H, Q).
template <std::floating_point T>
void normalize_state(Tensor<T>& x, const NormStats& stats) {
    stats.require_fitted();
    for (std::size_t i = 0; i < x.size(); i += 2) {
        x[i] = static_cast<T>((static_cast<double>(x[i]) - stats.mean[0]) / stats.stddev[0]);
        x[i + 1] =
            static_cast<T>((static_cast<double>(x[i + 1]) - stats.mean[1]) / stats.stddev[1]);
    }
}

template <std::floating_point T>
void denormalize_state(Tensor<T>& x, const NormStats& stats) {
    stats.require_fitted();
    for (std::size_t i = 0; i < x.size(); i += 2) {
        x[i] = static_cast<T>(static_cast<double>(x[i]) * stats.stddev[0] + stats.mean[0]);
        x[i + 1] =
            static_cast<T>(static_cast<double>(x[i + 1]) * stats.stddev[1] + stats.mean[1]);
    }
}

/**
 * Assemble one feature window [L, N, 8] in physical units for the history
 * hours tau in [t_end - L, t_end):
 *   channels 0-1: H, Q at tau
 *   channels 2-5: static geometry (repeated over time)
 *   channels 6-7: Q_up(tau), H_dn(tau) broadcast over the sections
 * The training target is the state at t_end.
 */
inline Tensor<double> build_window(const StateField& state, const Tensor<double>& static4,
                                   const ForcingSeries& forcings, std::size_t t_end,
                                   std::size_t seq_len) {
    const std::size_t n = state.sections();
    if (t_end < seq_len) throw ConfigError("build_window: insufficient history");
    if (t_end > state.steps() || t_end > forcings.length())
        throw ConfigError("build_window: series do not cover the window");
    if (static4.rank() != 2 || static4.dim(0) != n || static4.dim(1) != 4)
        throw ConfigError("build_window: static feature table must be [N, 4]");

    Tensor<double> w({seq_len, n, kNumChannels});
    for (std::size_t l = 0; l < seq_len; ++l) {
        const std::size_t tau = t_end - seq_len + l;
        for (std::size_t i = 0; i < n; ++i) {
            double* row = w.data() + (l * n + i) * kNumChannels;
            row[0] = state.h.at2(tau, i);
            row[1] = state.q.at2(tau, i);
            row[2] = static4.at2(i, 0);
            row[3] = static4.at2(i, 1);
            row[4] = static4.at2(i, 2);
            row[5] = static4.at2(i, 3);
            row[6] = forcings.q_up[tau];
            row[7] = forcings.h_dn[tau];
        }
    }
    return w;
}

/// Target (H, Q) at t_end as [N, 2].
inline Tensor<double> build_target(const StateField& state, std::size_t t_end) {
    const std::size_t n = state.sections();
    Tensor<double> t({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
        t.at2(i, 0) = state.h.at2(t_end, i);
        t.at2(i, 1) = state.q.at2(t_end, i);
    }
    return t;
}

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

template <std::floating_point T>
struct FnoBlockParams {
    Tensor<T> wk;     // [k_max, H, H, 2] complex mode mixers
    Tensor<T> skip_w; // [H, H] pointwise linear skip
    Tensor<T> skip_b; // [H]
};

/**
 * All learnable weights of the encoder -> GRU -> Geo-FNO -> decoder stack.
 * The encoder consumes the kept channels plus the concatenated coordinate;
 * the decoder emits the two normalized dynamic heads.
 */
template <std::floating_point T>
struct ModelParams {
    Tensor<T> enc_w, enc_b; // [Cin+1, H], [H]
    GruParams<T> gru;       // H -> H
    std::vector<FnoBlockParams<T>> fno;
    Tensor<T> dec_w, dec_b; // [H, 2], [2]

    std::size_t encoder_inputs() const { return enc_w.dim(0); }
    std::size_t hidden() const { return enc_w.dim(1); }
    std::size_t k_max() const { return fno.empty() ? 0 : fno[0].wk.dim(0); }

    template <class F>
    void for_each_named(F&& f) {
        f("encoder.w", enc_w);
        f("encoder.b", enc_b);
        f("gru.w", gru.w);
        f("gru.u", gru.u);
        f("gru.b", gru.b);
        for (std::size_t i = 0; i < fno.size(); ++i) {
            const std::string p = "fno" + std::to_string(i);
            f(p + ".wk", fno[i].wk);
            f(p + ".skip_w", fno[i].skip_w);
            f(p + ".skip_b", fno[i].skip_b);
        }
        f("decoder.w", dec_w);
        f("decoder.b", dec_b);
    }

    template <class F>
    void for_each_named(F&& f) const {
        const_cast<ModelParams*>(this)->for_each_named(
            [&](const std::string& name, Tensor<T>& t) { f(name, static_cast<const Tensor<T>&>(t)); });
    }

    std::vector<Tensor<T>*> tensors() {
        std::vector<Tensor<T>*> out;
        for_each_named([&](const std::string&, Tensor<T>& t) { out.push_back(&t); });
        return out;
    }

    std::vector<const Tensor<T>*> tensors() const {
        std::vector<const Tensor<T>*> out;
        for_each_named([&](const std::string&, const Tensor<T>& t) { out.push_back(&t); });
        return out;
    }

    /// Same-shape zero gradients container.
    ModelParams zeros_like() const {
        ModelParams g;
        g.enc_w.resize(enc_w.shape());
        g.enc_b.resize(enc_b.shape());
        g.gru.w.resize(gru.w.shape());
        g.gru.u.resize(gru.u.shape());
        g.gru.b.resize(gru.b.shape());
        g.fno.resize(fno.size());
        for (std::size_t i = 0; i < fno.size(); ++i) {
            g.fno[i].wk.resize(fno[i].wk.shape());
            g.fno[i].skip_w.resize(fno[i].skip_w.shape());
            g.fno[i].skip_b.resize(fno[i].skip_b.shape());
        }
        g.dec_w.resize(dec_w.shape());
        g.dec_b.resize(dec_b.shape());
        return g;
    }

    void zero() {
        for_each_named([](const std::string&, Tensor<T>& t) { t.zero(); });
    }

    template <std::floating_point U>
    ModelParams<U> cast() const {
        ModelParams<U> out;
        out.enc_w = enc_w.template cast<U>();
        out.enc_b = enc_b.template cast<U>();
        out.gru.w = gru.w.template cast<U>();
        out.gru.u = gru.u.template cast<U>();
        out.gru.b = gru.b.template cast<U>();
        out.fno.resize(fno.size());
        for (std::size_t i = 0; i < fno.size(); ++i) {
            out.fno[i].wk = fno[i].wk.template cast<U>();
            out.fno[i].skip_w = fno[i].skip_w.template cast<U>();
            out.fno[i].skip_b = fno[i].skip_b.template cast<U>();
        }
        out.dec_w = dec_w.template cast<U>();
        out.dec_b = dec_b.template cast<U>();
        return out;
    }
};

/**
 * Seeded initialization: uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for the
 * affine and GRU weights, complex Gaussian scaled by 1/hidden for the
 * spectral mode mixers. Draw order is fixed, so a seed pins every weight.
 */
template <std::floating_point T>
ModelParams<T> init_model_params(const ModelConfig& cfg, std::size_t kept_channels,
                                 std::size_t k_max, Rng rng) {
    cfg.validate();
    const std::size_t h = cfg.hidden;
    const std::size_t cin = kept_channels + 1; // + concatenated x_coord

    ModelParams<T> p;
    const double enc_bound = 1.0 / std::sqrt(static_cast<double>(cin));
    p.enc_w.resize({cin, h});
    p.enc_b.resize({h});
    fill_uniform(p.enc_w, rng, -enc_bound, enc_bound);
    fill_uniform(p.enc_b, rng, -enc_bound, enc_bound);

    const double gru_bound = 1.0 / std::sqrt(static_cast<double>(h));
    p.gru.w.resize({h, 3 * h});
    p.gru.u.resize({h, 3 * h});
    p.gru.b.resize({3 * h});
    fill_uniform(p.gru.w, rng, -gru_bound, gru_bound);
    fill_uniform(p.gru.u, rng, -gru_bound, gru_bound);
    fill_uniform(p.gru.b, rng, -gru_bound, gru_bound);

    p.fno.resize(cfg.fno_blocks);
    for (auto& blk : p.fno) {
        blk.wk.resize({k_max, h, h, 2});
        fill_normal(blk.wk, rng, 0.0, 1.0 / static_cast<double>(h));
        blk.skip_w.resize({h, h});
        blk.skip_b.resize({h});
        fill_uniform(blk.skip_w, rng, -gru_bound, gru_bound);
        fill_uniform(blk.skip_b, rng, -gru_bound, gru_bound);
    }

    p.dec_w.resize({h, 2});
    p.dec_b.resize({2});
    fill_uniform(p.dec_w, rng, -gru_bound, gru_bound);
    fill_uniform(p.dec_b, rng, -gru_bound, gru_bound);
    return p;
}

// ---------------------------------------------------------------------------
// forward / backward
// ---------------------------------------------------------------------------

template <std::floating_point T>
struct ForwardCache {
    std::size_t batch = 0, steps = 0, sections = 0;
    Tensor<T> enc_in;  // [B, L, N, Cin+1]
    GruCache<T> gru;
    struct BlockCache {
        Tensor<T> input;   // [B, N, H] block input
        SpectralCache<T> spec;
        Tensor<T> pre_act; // spectral + skip, before GELU
    };
    std::vector<BlockCache> blocks;
    Tensor<T> dec_in; // [B, N, H]
};

/**
 * Full surrogate forward pass. window is the normalized feature tensor
 * [B, L, N, 8]; x_coord is the raw normalized coordinate per section
 * (concatenated as the extra encoder input exactly as the architecture
 * prescribes, in addition to the x_coord feature channel). Returns the
 * normalized next-hour prediction [B, N, 2].
 */
template <std::floating_point T>
Tensor<T> model_forward(const ModelParams<T>& p, const ModelConfig& cfg,
                        const ChannelMask& mask, const Tensor<T>& window,
                        const std::vector<double>& x_coord,
                        ForwardCache<T>* cache = nullptr) {
    if (window.rank() != 4 || window.dim(3) != kNumChannels)
        throw ConfigError("model_forward: window must be [B, L, N, 8]");
    const std::size_t b = window.dim(0), l = window.dim(1), n = window.dim(2);
    if (n < 3) throw ConfigError("model_forward: need at least 3 cross-sections");
    if (l != cfg.seq_len) throw ConfigError("model_forward: window length != seq_len");
    if (x_coord.size() != n) throw ConfigError("model_forward: x_coord size mismatch");

    const auto kept = mask.kept_indices();
    const std::size_t cin = kept.size() + 1;
    if (p.encoder_inputs() != cin)
        throw ConfigError("model_forward: encoder width does not match channel mask");
    const std::size_t h = p.hidden();
    const std::size_t k_max = p.k_max();
    if (k_max > n / 2 + 1)
        throw ConfigError("model_forward: parameter mode count exceeds floor(N/2)+1");

    ForwardCache<T> local;
    ForwardCache<T>& c = cache ? *cache : local;
    c.batch = b;
    c.steps = l;
    c.sections = n;

    // select kept channels + concatenate the coordinate
    c.enc_in.resize({b, l, n, cin});
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t li = 0; li < l; ++li)
            for (std::size_t ni = 0; ni < n; ++ni) {
                const T* src = window.data() + ((bi * l + li) * n + ni) * kNumChannels;
                T* dst = c.enc_in.data() + ((bi * l + li) * n + ni) * cin;
                for (std::size_t k = 0; k < kept.size(); ++k) dst[k] = src[kept[k]];
                dst[kept.size()] = static_cast<T>(x_coord[ni]);
            }

    Tensor<T> enc_out;
    linear_forward(c.enc_in, p.enc_w, p.enc_b, enc_out); // [B, L, N, H]

    // [B, L, N, H] -> [L, B*N, H] so each GRU step is one contiguous matrix
    Tensor<T> gru_x({l, b * n, h});
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t li = 0; li < l; ++li) {
            const T* src = enc_out.data() + ((bi * l + li) * n) * h;
            T* dst = gru_x.data() + (li * b * n + bi * n) * h;
            std::copy(src, src + n * h, dst);
        }

    Tensor<T> hidden = gru_forward(p.gru, gru_x, cache ? &c.gru : nullptr); // [B*N, H]
    hidden.reshape({b, n, h});

    c.blocks.resize(p.fno.size());
    Tensor<T> v = std::move(hidden);
    for (std::size_t i = 0; i < p.fno.size(); ++i) {
        auto& blk = c.blocks[i];
        if (cache) blk.input = v;
        Tensor<T> spec_out;
        spectral_forward(v, p.fno[i].wk, spec_out, cache ? &blk.spec : nullptr);
        Tensor<T> skip_out;
        linear_forward(v, p.fno[i].skip_w, p.fno[i].skip_b, skip_out);
        Tensor<T>& pre = blk.pre_act;
        pre.resize(spec_out.shape());
        for (std::size_t j = 0; j < pre.size(); ++j) pre[j] = spec_out[j] + skip_out[j];
        Tensor<T> activated;
        gelu_forward(pre, activated);
        v = std::move(activated);
        if (!cache) blk = {};
    }

    if (cache) c.dec_in = v;
    Tensor<T> pred;
    linear_forward(v, p.dec_w, p.dec_b, pred); // [B, N, 2]
    pred.reshape({b, n, 2});
    return pred;
}

/// Accumulate parameter gradients for one batch. dpred is dL/dprediction
/// [B, N, 2]; grads must be zeroed (or carry the running sum) by the caller.
template <std::floating_point T>
void model_backward(const ModelParams<T>& p, const ModelConfig& cfg,
                    const ChannelMask& mask, const ForwardCache<T>& c,
                    const Tensor<T>& dpred, ModelParams<T>& grads) {
    const std::size_t b = c.batch, l = c.steps, n = c.sections;
    const std::size_t h = p.hidden();

    Tensor<T> dv;
    linear_backward(c.dec_in, p.dec_w, dpred, &dv, grads.dec_w, grads.dec_b);

    for (std::size_t i = p.fno.size(); i-- > 0;) {
        const auto& blk = c.blocks[i];
        Tensor<T> dpre;
        gelu_backward(blk.pre_act, dv, dpre);
        Tensor<T> dv_spec;
        spectral_backward(p.fno[i].wk, blk.spec, dpre, grads.fno[i].wk, &dv_spec);
        Tensor<T> dv_skip;
        linear_backward(blk.input, p.fno[i].skip_w, dpre, &dv_skip, grads.fno[i].skip_w,
                        grads.fno[i].skip_b);
        dv.resize(dv_spec.shape());
        for (std::size_t j = 0; j < dv.size(); ++j) dv[j] = dv_spec[j] + dv_skip[j];
    }

    // dv is dL/dh_final [B, N, H] -> [B*N, H]
    dv.reshape({b * n, h});
    Tensor<T> dgru_x;
    gru_backward(p.gru, c.gru, dv, grads.gru, &dgru_x); // [L, B*N, H]

    // back to [B, L, N, H] for the encoder
    Tensor<T> denc_out({b, l, n, h});
    for (std::size_t bi = 0; bi < b; ++bi)
        for (std::size_t li = 0; li < l; ++li) {
            const T* src = dgru_x.data() + (li * b * n + bi * n) * h;
            T* dst = denc_out.data() + ((bi * l + li) * n) * h;
            std::copy(src, src + n * h, dst);
        }
    linear_backward(c.enc_in, p.enc_w, denc_out, static_cast<Tensor<T>*>(nullptr),
                    grads.enc_w, grads.enc_b);
    (void)cfg;
    (void)mask;
}

} // namespace reachcast

#endif // REACHCAST_MODEL_HPP
