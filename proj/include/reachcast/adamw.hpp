#ifndef REACHCAST_ADAMW_HPP
#define REACHCAST_ADAMW_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "reachcast/tensor.hpp"

namespace reachcast {

template <std::floating_point T>
struct AdamWConfig {
    T lr = T(2e-4);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
    T weight_decay = T(1e-2);
};

/// First/second moment buffers, one pair per parameter tensor.
template <std::floating_point T>
struct AdamWState {
    std::vector<Tensor<T>> m;
    std::vector<Tensor<T>> v;
    long step = 0;
};

template <std::floating_point T>
AdamWState<T> adamw_init(const std::vector<const Tensor<T>*>& params) {
    AdamWState<T> st;
    st.m.reserve(params.size());
    st.v.reserve(params.size());
    for (const auto* p : params) {
        st.m.emplace_back(p->shape());
        st.v.emplace_back(p->shape());
    }
    return st;
}

/**
 * Decoupled-weight-decay Adam step:
 *   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
 *   theta <- theta - lr * ( mhat / (sqrt(vhat) + eps) + wd * theta )
 * with bias-corrected mhat, vhat.
 */
template <std::floating_point T>
void adamw_step(const std::vector<Tensor<T>*>& params,
                const std::vector<const Tensor<T>*>& grads,
                AdamWState<T>& st, const AdamWConfig<T>& cfg) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw std::invalid_argument("adamw_step: parameter/gradient count mismatch");
    st.step += 1;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg.beta1), st.step));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(cfg.beta2), st.step));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor<T>& p = *params[i];
        const Tensor<T>& g = *grads[i];
        Tensor<T>& m = st.m[i];
        Tensor<T>& v = st.v[i];
        if (!p.same_shape(g) || !p.same_shape(m))
            throw std::invalid_argument("adamw_step: shape mismatch");
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = cfg.beta1 * m[j] + (T(1) - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (T(1) - cfg.beta2) * g[j] * g[j];
            const T mhat = m[j] / bc1;
            const T vhat = v[j] / bc2;
            p[j] -= cfg.lr * (mhat / (static_cast<T>(std::sqrt(static_cast<double>(vhat))) + cfg.eps) +
                              cfg.weight_decay * p[j]);
        }
    }
}

} // namespace reachcast

#endif // REACHCAST_ADAMW_HPP
