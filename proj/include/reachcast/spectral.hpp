#ifndef REACHCAST_SPECTRAL_HPP
#define REACHCAST_SPECTRAL_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include "reachcast/dft.hpp"
#include "reachcast/tensor.hpp"

namespace reachcast {

/**
 * 1-D spectral convolution over the spatial axis.
 *
 * Input v [M, N, H] is real. Per channel column the layer takes the DFT
 * along N, keeps the one-sided modes k = 0..k_max-1 (DC included), mixes
 * channels per mode with a learned complex matrix, zeroes all discarded
 * modes, and inverse-transforms assuming Hermitian symmetry so the output is
 * exactly real:
 *
 *   y[n,o] = (1/N) sum_k w_k Re( Yhat[k,o] e^{+2 pi i n k / N} )
 *
 * with w_0 = 1, w_k = 2 for interior modes and w_{N/2} = 1 when N is even
 * and the Nyquist bin is retained. The imaginary parts of the DC and Nyquist
 * bins do not reach the output (the standard complex-to-real convention).
 *
 * Weights are stored interleaved re/im as wk [k_max, H, H, 2]; the memory
 * layout is std::complex-compatible, so per mode the H x H complex matrix is
 * mapped directly.
 */
template <std::floating_point T>
struct SpectralCache {
    // Retained spectrum of the input, [k_max, M, H] complex, for dW.
    AVector<std::complex<T>> x_spec;
    std::size_t batch = 0, n = 0, channels = 0, k_max = 0;
};

template <std::floating_point T>
using CMat = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <std::floating_point T>
using CMap = Eigen::Map<CMat<T>>;
template <std::floating_point T>
using CCMap = Eigen::Map<const CMat<T>>;

namespace detail {

/// Half-spectrum weights w_k for the real inverse transform.
template <std::floating_point T>
T hermitian_weight(std::size_t k, std::size_t n) {
    if (k == 0) return T(1);
    if (n % 2 == 0 && k == n / 2) return T(1);
    return T(2);
}

} // namespace detail

template <std::floating_point T>
std::size_t max_mode_count(std::size_t n) { return n / 2 + 1; }

/// y [M, N, H] = spectral_conv(v, wk). Fills cache when given (needed for
/// the backward pass).
template <std::floating_point T>
void spectral_forward(const Tensor<T>& v, const Tensor<T>& wk, Tensor<T>& y,
                      SpectralCache<T>* cache = nullptr) {
    if (v.rank() != 3) throw std::invalid_argument("spectral_forward: v must be [M, N, H]");
    const std::size_t m = v.dim(0), n = v.dim(1), hc = v.dim(2);
    const std::size_t k_max = wk.dim(0);
    if (wk.rank() != 4 || wk.dim(1) != hc || wk.dim(2) != hc || wk.dim(3) != 2)
        throw std::invalid_argument("spectral_forward: wk must be [k_max, H, H, 2]");
    if (k_max == 0 || k_max > n / 2 + 1)
        throw std::invalid_argument("spectral_forward: k_max out of range");

    if (!y.same_shape(v)) y.resize(v.shape());
    DftPlan<T> plan(n);
    DftScratch<T> scratch;

    // forward transforms: x_spec[k, mi, h] for k < k_max
    AVector<std::complex<T>> x_spec(k_max * m * hc);
    AVector<std::complex<T>> buf(n);
    for (std::size_t mi = 0; mi < m; ++mi) {
        const T* vrow = v.data() + mi * n * hc;
        for (std::size_t h = 0; h < hc; ++h) {
            for (std::size_t j = 0; j < n; ++j) buf[j] = std::complex<T>(vrow[j * hc + h], 0);
            plan.forward(buf.data(), &scratch);
            for (std::size_t k = 0; k < k_max; ++k)
                x_spec[(k * m + mi) * hc + h] = buf[k];
        }
    }

    // per-mode channel mixing: Yhat[k] = X[k] * W[k]  ([M,H] x [H,H])
    const auto* wptr = reinterpret_cast<const std::complex<T>*>(wk.data());
    AVector<std::complex<T>> y_spec(k_max * m * hc);
    for (std::size_t k = 0; k < k_max; ++k) {
        CCMap<T> xk(x_spec.data() + k * m * hc, static_cast<Eigen::Index>(m),
                    static_cast<Eigen::Index>(hc));
        CCMap<T> wmat(wptr + k * hc * hc, static_cast<Eigen::Index>(hc),
                      static_cast<Eigen::Index>(hc));
        CMap<T> yk(y_spec.data() + k * m * hc, static_cast<Eigen::Index>(m),
                   static_cast<Eigen::Index>(hc));
        yk.noalias() = xk * wmat;
    }

    // inverse with Hermitian symmetry; discarded modes stay zero
    for (std::size_t mi = 0; mi < m; ++mi) {
        T* yrow = y.data() + mi * n * hc;
        for (std::size_t h = 0; h < hc; ++h) {
            std::fill(buf.begin(), buf.end(), std::complex<T>(0));
            for (std::size_t k = 0; k < k_max; ++k)
                buf[k] = y_spec[(k * m + mi) * hc + h] * detail::hermitian_weight<T>(k, n);
            plan.inverse(buf.data(), &scratch);
            for (std::size_t j = 0; j < n; ++j) yrow[j * hc + h] = buf[j].real();
        }
    }

    if (cache) {
        cache->x_spec = std::move(x_spec);
        cache->batch = m;
        cache->n = n;
        cache->channels = hc;
        cache->k_max = k_max;
    }
}

/**
 * Adjoint pass. Given dy [M, N, H], accumulates dwk (+=) and overwrites dv
 * (optional). Derivation: the transform pair is linear, so
 *   G[k,o]   = (w_k / N) * DFT(dy[:,o])[k]
 *   dW[k,i,o] += sum_m conj(X[k,m,i]) G[k,m,o]
 *   dX[k,m,i] = sum_o G[k,m,o] conj(W[k,i,o])
 *   dv[n,i]  = Re( sum_k dX[k,i] e^{+2 pi i n k / N} )
 */
template <std::floating_point T>
void spectral_backward(const Tensor<T>& wk, const SpectralCache<T>& cache,
                       const Tensor<T>& dy, Tensor<T>& dwk, Tensor<T>* dv = nullptr) {
    const std::size_t m = cache.batch, n = cache.n, hc = cache.channels, k_max = cache.k_max;
    if (dy.size() != m * n * hc) throw std::invalid_argument("spectral_backward: dy shape mismatch");
    if (!dwk.same_shape(wk)) dwk.resize(wk.shape());

    DftPlan<T> plan(n);
    DftScratch<T> scratch;
    AVector<std::complex<T>> g(k_max * m * hc);
    AVector<std::complex<T>> buf(n);
    const T invn = T(1) / static_cast<T>(n);

    for (std::size_t mi = 0; mi < m; ++mi) {
        const T* grow = dy.data() + mi * n * hc;
        for (std::size_t h = 0; h < hc; ++h) {
            for (std::size_t j = 0; j < n; ++j) buf[j] = std::complex<T>(grow[j * hc + h], 0);
            plan.forward(buf.data(), &scratch);
            for (std::size_t k = 0; k < k_max; ++k)
                g[(k * m + mi) * hc + h] =
                    buf[k] * (detail::hermitian_weight<T>(k, n) * invn);
        }
    }

    const auto* wptr = reinterpret_cast<const std::complex<T>*>(wk.data());
    auto* dwptr = reinterpret_cast<std::complex<T>*>(dwk.data());
    AVector<std::complex<T>> dx_spec;
    if (dv) dx_spec.resize(k_max * m * hc);

    for (std::size_t k = 0; k < k_max; ++k) {
        CCMap<T> xk(cache.x_spec.data() + k * m * hc, static_cast<Eigen::Index>(m),
                    static_cast<Eigen::Index>(hc));
        CCMap<T> gk(g.data() + k * m * hc, static_cast<Eigen::Index>(m),
                    static_cast<Eigen::Index>(hc));
        CMap<T> dwm(dwptr + k * hc * hc, static_cast<Eigen::Index>(hc),
                    static_cast<Eigen::Index>(hc));
        dwm.noalias() += xk.conjugate().transpose() * gk;
        if (dv) {
            CCMap<T> wmat(wptr + k * hc * hc, static_cast<Eigen::Index>(hc),
                          static_cast<Eigen::Index>(hc));
            CMap<T> dxk(dx_spec.data() + k * m * hc, static_cast<Eigen::Index>(m),
                        static_cast<Eigen::Index>(hc));
            dxk.noalias() = gk * wmat.conjugate().transpose();
        }
    }

    if (dv) {
        dv->resize({m, n, hc});
        for (std::size_t mi = 0; mi < m; ++mi) {
            T* drow = dv->data() + mi * n * hc;
            for (std::size_t h = 0; h < hc; ++h) {
                std::fill(buf.begin(), buf.end(), std::complex<T>(0));
                for (std::size_t k = 0; k < k_max; ++k)
                    buf[k] = dx_spec[(k * m + mi) * hc + h];
                // unnormalized inverse: N * idft
                plan.inverse(buf.data(), &scratch);
                for (std::size_t j = 0; j < n; ++j)
                    drow[j * hc + h] = buf[j].real() * static_cast<T>(n);
            }
        }
    }
}

} // namespace reachcast

#endif // REACHCAST_SPECTRAL_HPP
