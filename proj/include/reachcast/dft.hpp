#ifndef REACHCAST_DFT_HPP
#define REACHCAST_DFT_HPP

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace reachcast {

namespace detail {

inline constexpr double kPi = 3.14159265358979323846;

/// In-place iterative radix-2 FFT. n must be a power of two.
/// sign = -1 gives X[k] = sum_j x[j] e^{-2*pi*i*jk/n} (no normalization).
template <std::floating_point T>
void fft_pow2(std::complex<T>* x, std::size_t n, int sign) {
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const std::complex<T> wlen(static_cast<T>(std::cos(ang)),
                                   static_cast<T>(std::sin(ang)));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<T> w(1);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<T> u = x[i + k];
                const std::complex<T> v = x[i + k + len / 2] * w;
                x[i + k] = u + v;
                x[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace detail

/// Reusable Bluestein work buffer; hand one to repeated plan calls to avoid
/// a fresh allocation per transform.
template <std::floating_point T>
struct DftScratch {
    std::vector<std::complex<T>> a;
};

/**
 * Discrete Fourier transform of arbitrary length: radix-2 fast path when the
 * size is a power of two, Bluestein chirp-z otherwise, so any cross-section
 * count is supported. Convention: forward X[k] = sum_j x[j] e^{-2*pi*i*jk/N};
 * inverse carries the 1/N factor.
 *
 * A plan precomputes the chirp tables for one size and can be reused across
 * many transforms (it is immutable after construction, so sharing between
 * threads is safe; the scratch buffers live in the caller).
 */
template <std::floating_point T>
class DftPlan {
public:
    explicit DftPlan(std::size_t n) : n_(n) {
        if (n == 0) throw std::invalid_argument("DftPlan: size must be >= 1");
        pow2_ = detail::is_pow2(n);
        if (!pow2_) {
            m_ = detail::next_pow2(2 * n - 1);
            chirp_.resize(n);
            // chirp_[j] = e^{-i*pi*j^2/n}; j^2 taken mod 2n to keep the trig
            // argument small for accuracy at large n.
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t r = (j * j) % (2 * n);
                const double ang = -detail::kPi * static_cast<double>(r) / static_cast<double>(n);
                chirp_[j] = std::complex<T>(static_cast<T>(std::cos(ang)),
                                            static_cast<T>(std::sin(ang)));
            }
            bfft_.assign(m_, std::complex<T>(0));
            bfft_[0] = std::conj(chirp_[0]);
            for (std::size_t j = 1; j < n; ++j) {
                bfft_[j] = std::conj(chirp_[j]);
                bfft_[m_ - j] = std::conj(chirp_[j]);
            }
            detail::fft_pow2(bfft_.data(), m_, -1);
        }
    }

    std::size_t size() const { return n_; }

    /// Forward transform in place.
    void forward(std::complex<T>* x, DftScratch<T>* scratch = nullptr) const {
        transform(x, -1, scratch);
    }

    /// Inverse transform in place (divides by N).
    void inverse(std::complex<T>* x, DftScratch<T>* scratch = nullptr) const {
        transform(x, +1, scratch);
        const T inv = T(1) / static_cast<T>(n_);
        for (std::size_t i = 0; i < n_; ++i) x[i] *= inv;
    }

private:
    void transform(std::complex<T>* x, int sign, DftScratch<T>* scratch) const {
        if (n_ == 1) return;
        if (pow2_) {
            detail::fft_pow2(x, n_, sign);
            return;
        }
        // Bluestein: X[k] = a_k * ((x.a) conv b)[k] with a_j = e^{-i pi j^2/n}.
        // The inverse direction conjugates input and output.
        DftScratch<T> local;
        DftScratch<T>& s = scratch ? *scratch : local;
        s.a.assign(m_, std::complex<T>(0));
        auto& a = s.a;
        if (sign < 0) {
            for (std::size_t j = 0; j < n_; ++j) a[j] = x[j] * chirp_[j];
        } else {
            for (std::size_t j = 0; j < n_; ++j) a[j] = std::conj(x[j]) * chirp_[j];
        }
        detail::fft_pow2(a.data(), m_, -1);
        for (std::size_t j = 0; j < m_; ++j) a[j] *= bfft_[j];
        detail::fft_pow2(a.data(), m_, +1);
        const T invm = T(1) / static_cast<T>(m_);
        if (sign < 0) {
            for (std::size_t k = 0; k < n_; ++k) x[k] = a[k] * invm * chirp_[k];
        } else {
            for (std::size_t k = 0; k < n_; ++k)
                x[k] = std::conj(a[k] * invm * chirp_[k]);
        }
    }

    std::size_t n_ = 0;
    bool pow2_ = true;
    std::size_t m_ = 0;
    std::vector<std::complex<T>> chirp_;
    std::vector<std::complex<T>> bfft_; // FFT of the chirp kernel
};

/// One-shot forward DFT.
template <std::floating_point T>
std::vector<std::complex<T>> dft(const std::vector<std::complex<T>>& x) {
    std::vector<std::complex<T>> out = x;
    DftPlan<T>(x.size()).forward(out.data());
    return out;
}

/// One-shot inverse DFT (with 1/N).
template <std::floating_point T>
std::vector<std::complex<T>> idft(const std::vector<std::complex<T>>& x) {
    std::vector<std::complex<T>> out = x;
    DftPlan<T>(x.size()).inverse(out.data());
    return out;
}

} // namespace reachcast

#endif // REACHCAST_DFT_HPP
