#ifndef REACHCAST_LAYERS_HPP
#define REACHCAST_LAYERS_HPP

#include <cmath>
#include <stdexcept>

#include "reachcast/tensor.hpp"

namespace reachcast {

/**
 * Affine layer y = xW + b applied to the trailing axis: x is treated as
 * [rows, d_in] with rows = numel/d_in, so any leading batch structure passes
 * through unchanged.
 */
template <std::floating_point T>
void linear_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                    Tensor<T>& y) {
    const std::size_t din = w.dim(0), dout = w.dim(1);
    if (x.size() % din != 0) throw std::invalid_argument("linear_forward: shape mismatch");
    if (b.size() != dout) throw std::invalid_argument("linear_forward: bias shape mismatch");
    const std::size_t rows = x.size() / din;

    std::vector<std::size_t> yshape = x.shape();
    yshape.back() = dout;
    if (y.shape() != yshape) y.resize(yshape);

    auto xm = as_matrix(x, din);
    auto wm = as_matrix(w, dout);
    auto ym = as_matrix(y, dout);
    ym.noalias() = xm * wm;
    auto bv = Eigen::Map<const Eigen::RowVector<T, Eigen::Dynamic>>(
        b.data(), static_cast<Eigen::Index>(dout));
    ym.rowwise() += bv;
    (void)rows;
}

/// Gradients for linear_forward. dw/db are accumulated into (+=) so a batch
/// loop can reuse them; dx is overwritten. Pass dx = nullptr to skip it.
template <std::floating_point T>
void linear_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
                     Tensor<T>* dx, Tensor<T>& dw, Tensor<T>& db) {
    const std::size_t din = w.dim(0), dout = w.dim(1);
    auto xm = as_matrix(x, din);
    auto wm = as_matrix(w, dout);
    auto dym = as_matrix(dy, dout);

    if (!dw.same_shape(w)) dw.resize(w.shape());
    if (db.size() != dout) db.resize({dout});
    auto dwm = as_matrix(dw, dout);
    dwm.noalias() += xm.transpose() * dym;
    auto dbv = Eigen::Map<Eigen::RowVector<T, Eigen::Dynamic>>(
        db.data(), static_cast<Eigen::Index>(dout));
    dbv += dym.colwise().sum();

    if (dx) {
        if (!dx->same_shape(x)) dx->resize(x.shape());
        auto dxm = as_matrix(*dx, din);
        dxm.noalias() = dym * wm.transpose();
    }
}

/// Exact GELU, 0.5*x*(1 + erf(x/sqrt(2))).
template <std::floating_point T>
T gelu(T x) {
    return T(0.5) * x * (T(1) + static_cast<T>(std::erf(static_cast<double>(x) * 0.7071067811865475)));
}

template <std::floating_point T>
T gelu_grad(T x) {
    const double xd = static_cast<double>(x);
    const double cdf = 0.5 * (1.0 + std::erf(xd * 0.7071067811865475));
    const double pdf = std::exp(-0.5 * xd * xd) * 0.3989422804014327; // 1/sqrt(2 pi)
    return static_cast<T>(cdf + xd * pdf);
}

template <std::floating_point T>
void gelu_forward(const Tensor<T>& x, Tensor<T>& y) {
    if (!y.same_shape(x)) y.resize(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = gelu(x[i]);
}

template <std::floating_point T>
void gelu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx) {
    if (!dx.same_shape(x)) dx.resize(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] = dy[i] * gelu_grad(x[i]);
}

} // namespace reachcast

#endif // REACHCAST_LAYERS_HPP
