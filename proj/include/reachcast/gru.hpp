#ifndef REACHCAST_GRU_HPP
#define REACHCAST_GRU_HPP

#include <cmath>
#include <stdexcept>

#include "reachcast/tensor.hpp"

namespace reachcast {

/**
 * Single-layer GRU. Gate convention (fixed here since the literature has two
 * common forms):
 *
 *   z = sigmoid(x W_z + h U_z + b_z)
 *   r = sigmoid(x W_r + h U_r + b_r)
 *   hcand = tanh(x W_h + (r .* h) U_h + b_h)
 *   h' = (1 - z) .* hcand + z .* h
 *
 * Gate matrices are packed column-wise in order (z, r, h):
 *   w [d, 3H], u [H, 3H], b [3H].
 * The sequence runs over the leading axis of x [L, M, d] and every window
 * starts from h_0 = 0.
 *
 * The input projections for all steps are batched into one matrix product;
 * per step only the recurrent projections remain. Activations go through
 * Eigen's vectorized array kernels.
 */
template <std::floating_point T>
struct GruParams {
    Tensor<T> w; // [d, 3H]
    Tensor<T> u; // [H, 3H]
    Tensor<T> b; // [3H]

    std::size_t input_dim() const { return w.dim(0); }
    std::size_t hidden_dim() const { return u.dim(0); }
};

/// Saved activations for backpropagation through time.
template <std::floating_point T>
struct GruCache {
    std::size_t steps = 0, rows = 0, hidden = 0;
    Tensor<T> x;     // [L, M, d] input copy
    Tensor<T> h;     // [L+1, M, H]; h[0] = 0
    Tensor<T> z;     // [L, M, H]
    Tensor<T> r;     // [L, M, H]
    Tensor<T> hcand; // [L, M, H]
};

namespace detail {

/// One recurrence step on preprojected input gates. px [M, 3H] must already
/// hold x_t W + b; h_prev and the outputs are [M, H] maps.
template <std::floating_point T>
void gru_step(const CMapRM<T>& px, const CMapRM<T>& h_prev, const CMapRM<T>& u,
              MapRM<T> z, MapRM<T> r, MapRM<T> hc, MapRM<T> h_t, MatRM<T>& scratch_zr,
              MatRM<T>& scratch_h) {
    const Eigen::Index h = h_prev.cols();
    scratch_zr.noalias() = h_prev * u.leftCols(2 * h);
    z.array() =
        T(1) / ((-(px.leftCols(h) + scratch_zr.leftCols(h)).array()).exp() + T(1));
    r.array() = T(1) /
                ((-(px.middleCols(h, h) + scratch_zr.rightCols(h)).array()).exp() + T(1));
    scratch_h.noalias() = (r.cwiseProduct(h_prev)) * u.rightCols(h);
    hc.array() = (px.rightCols(h) + scratch_h).array().tanh();
    h_t.array() = (T(1) - z.array()) * hc.array() + z.array() * h_prev.array();
}

} // namespace detail

/// One GRU step: x_t [M, d], h_prev [M, H] -> h_t [M, H].
/// When gate buffers are supplied they receive the post-activation values.
template <std::floating_point T>
void gru_cell_forward(const GruParams<T>& p, const Tensor<T>& x_t,
                      const Tensor<T>& h_prev, Tensor<T>& h_t,
                      Tensor<T>* z_out = nullptr, Tensor<T>* r_out = nullptr,
                      Tensor<T>* hcand_out = nullptr) {
    const std::size_t d = p.input_dim(), hdim = p.hidden_dim();
    if (x_t.size() % d != 0 || h_prev.size() % hdim != 0)
        throw std::invalid_argument("gru_cell_forward: shape mismatch");
    const Eigen::Index m = static_cast<Eigen::Index>(x_t.size() / d);
    const Eigen::Index h = static_cast<Eigen::Index>(hdim);

    MatRM<T> px = as_matrix(x_t, d) * as_matrix(p.w, 3 * hdim);
    px.rowwise() +=
        Eigen::Map<const Eigen::RowVector<T, Eigen::Dynamic>>(p.b.data(), 3 * h);

    if (!h_t.same_shape(h_prev)) h_t.resize(h_prev.shape());
    Tensor<T> z({static_cast<std::size_t>(m), hdim}), r(z.shape()), hc(z.shape());
    MatRM<T> s_zr(m, 2 * h), s_h(m, h);
    detail::gru_step<T>(CMapRM<T>(px.data(), m, 3 * h), as_matrix(h_prev, hdim),
                        as_matrix(p.u, 3 * hdim), as_matrix(z, hdim), as_matrix(r, hdim),
                        as_matrix(hc, hdim), as_matrix(h_t, hdim), s_zr, s_h);
    if (z_out) *z_out = std::move(z);
    if (r_out) *r_out = std::move(r);
    if (hcand_out) *hcand_out = std::move(hc);
}

/// Run the GRU over x [L, M, d] from h_0 = 0; returns the final hidden state
/// [M, H]. A cache is filled when requested (needed for gru_backward).
template <std::floating_point T>
Tensor<T> gru_forward(const GruParams<T>& p, const Tensor<T>& x, GruCache<T>* cache = nullptr) {
    if (x.rank() != 3) throw std::invalid_argument("gru_forward: x must be [L, M, d]");
    const std::size_t steps = x.dim(0), rows = x.dim(1), d = x.dim(2);
    const std::size_t hdim = p.hidden_dim();
    if (d != p.input_dim()) throw std::invalid_argument("gru_forward: input dim mismatch");
    const Eigen::Index m = static_cast<Eigen::Index>(rows);
    const Eigen::Index h = static_cast<Eigen::Index>(hdim);

    // all input projections in one product: [L*M, d] x [d, 3H]
    MatRM<T> px_all = as_matrix(x, d) * as_matrix(p.w, 3 * hdim);
    px_all.rowwise() +=
        Eigen::Map<const Eigen::RowVector<T, Eigen::Dynamic>>(p.b.data(), 3 * h);

    GruCache<T> local;
    GruCache<T>& c = cache ? *cache : local;
    c.steps = steps;
    c.rows = rows;
    c.hidden = hdim;
    if (cache) c.x = x;
    c.h.resize({steps + 1, rows, hdim});
    c.z.resize({steps, rows, hdim});
    c.r.resize({steps, rows, hdim});
    c.hcand.resize({steps, rows, hdim});

    const std::size_t slab = rows * hdim;
    auto um = as_matrix(p.u, 3 * hdim);
    MatRM<T> s_zr(m, 2 * h), s_h(m, h);
    for (std::size_t t = 0; t < steps; ++t) {
        CMapRM<T> px(px_all.data() + t * rows * 3 * hdim, m, 3 * h);
        CMapRM<T> h_prev(c.h.data() + t * slab, m, h);
        detail::gru_step<T>(px, h_prev, um, MapRM<T>(c.z.data() + t * slab, m, h),
                            MapRM<T>(c.r.data() + t * slab, m, h),
                            MapRM<T>(c.hcand.data() + t * slab, m, h),
                            MapRM<T>(c.h.data() + (t + 1) * slab, m, h), s_zr, s_h);
    }

    Tensor<T> out({rows, hdim});
    std::copy(c.h.data() + steps * slab, c.h.data() + (steps + 1) * slab, out.data());
    return out;
}

/**
 * Backpropagation through time. dh_final is dL/dh_L [M, H]. Parameter
 * gradients are accumulated (+=); dx (optional) is overwritten with
 * dL/dx [L, M, d].
 */
template <std::floating_point T>
void gru_backward(const GruParams<T>& p, const GruCache<T>& cache,
                  const Tensor<T>& dh_final, GruParams<T>& grads,
                  Tensor<T>* dx = nullptr) {
    const std::size_t steps = cache.steps, rows = cache.rows, hdim = cache.hidden;
    const std::size_t d = p.input_dim();
    const Eigen::Index m = static_cast<Eigen::Index>(rows);
    const Eigen::Index h = static_cast<Eigen::Index>(hdim);

    if (!grads.w.same_shape(p.w)) grads.w.resize(p.w.shape());
    if (!grads.u.same_shape(p.u)) grads.u.resize(p.u.shape());
    if (grads.b.size() != 3 * hdim) grads.b.resize({3 * hdim});
    if (dx) dx->resize({steps, rows, d});

    auto um = as_matrix(p.u, 3 * hdim);
    auto wm = as_matrix(p.w, 3 * hdim);
    auto duw = as_matrix(grads.u, 3 * hdim);
    auto dwm = as_matrix(grads.w, 3 * hdim);
    auto dbv = Eigen::Map<Eigen::RowVector<T, Eigen::Dynamic>>(grads.b.data(), 3 * h);

    MatRM<T> dh = as_matrix(dh_final, hdim); // running dL/dh_t
    // pre-activation grads for every step, so dW and db batch into one pass
    Tensor<T> da_all({steps, rows, 3 * hdim});
    MatRM<T> dz(m, h), dhc(m, h), dh_prev(m, h), drh(m, h), dr(m, h);
    const std::size_t slab = rows * hdim;

    for (std::size_t t = steps; t-- > 0;) {
        CMapRM<T> z(cache.z.data() + t * slab, m, h);
        CMapRM<T> r(cache.r.data() + t * slab, m, h);
        CMapRM<T> hc(cache.hcand.data() + t * slab, m, h);
        CMapRM<T> hprev(cache.h.data() + t * slab, m, h);
        MapRM<T> da(da_all.data() + t * rows * 3 * hdim, m, 3 * h);

        // h' = (1-z).*hc + z.*hprev
        dz.array() = dh.array() * (hprev.array() - hc.array());
        dhc.array() = dh.array() * (T(1) - z.array());
        dh_prev.array() = dh.array() * z.array();

        da.rightCols(h).array() = dhc.array() * (T(1) - hc.array() * hc.array());
        drh.noalias() = da.rightCols(h) * um.rightCols(h).transpose();
        dr.array() = drh.array() * hprev.array();
        dh_prev.array() += drh.array() * r.array();

        da.leftCols(h).array() = dz.array() * z.array() * (T(1) - z.array());
        da.middleCols(h, h).array() = dr.array() * r.array() * (T(1) - r.array());

        dh_prev.noalias() += da.leftCols(2 * h) * um.leftCols(2 * h).transpose();

        duw.leftCols(2 * h).noalias() += hprev.transpose() * da.leftCols(2 * h);
        duw.rightCols(h).noalias() +=
            (r.cwiseProduct(hprev)).transpose() * da.rightCols(h);

        dh = dh_prev;
    }

    auto da_mat = as_matrix(da_all, 3 * hdim); // [L*M, 3H]
    dwm.noalias() += as_matrix(cache.x, d).transpose() * da_mat;
    dbv += da_mat.colwise().sum();
    if (dx) as_matrix(*dx, d).noalias() = da_mat * wm.transpose();
}

} // namespace reachcast

#endif // REACHCAST_GRU_HPP
