#ifndef REACHCAST_TENSOR_HPP
#define REACHCAST_TENSOR_HPP

#include <Eigen/Core>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "reachcast/rng.hpp"
#include "reachcast/util.hpp"

namespace reachcast {

/**
 * Dense row-major tensor of float32/float64 values. A thin contiguous
 * container: the layer kernels map regions of it into Eigen matrices.
 * Storage is 64-byte aligned so SIMD kernels behave identically run to run.
 */
template <std::floating_point T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(numel(shape_), T(0)) {}

    Tensor(std::initializer_list<std::size_t> shape)
        : Tensor(std::vector<std::size_t>(shape)) {}

    static std::size_t numel(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    T& at3(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const T& at3(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    T& at4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }
    const T& at4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
    }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
    void zero() { fill(T(0)); }

    void resize(std::vector<std::size_t> shape) {
        shape_ = std::move(shape);
        data_.assign(numel(shape_), T(0));
    }

    /// Reinterpret the shape without touching data (element count must match).
    void reshape(std::vector<std::size_t> shape) {
        if (numel(shape) != data_.size())
            throw std::invalid_argument("reshape: element count mismatch");
        shape_ = std::move(shape);
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (T v : data_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

    template <std::floating_point U>
    Tensor<U> cast() const {
        Tensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i)
            out[i] = static_cast<U>(data_[i]);
        return out;
    }

private:
    std::vector<std::size_t> shape_;
    AVector<T> data_;
};

template <class T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapRM = Eigen::Map<MatRM<T>>;
template <class T>
using CMapRM = Eigen::Map<const MatRM<T>>;

/// View a tensor as a [rows x cols] row-major matrix (rows = size/cols).
template <class T>
MapRM<T> as_matrix(Tensor<T>& t, std::size_t cols) {
    return MapRM<T>(t.data(), static_cast<Eigen::Index>(t.size() / cols),
                    static_cast<Eigen::Index>(cols));
}

template <class T>
CMapRM<T> as_matrix(const Tensor<T>& t, std::size_t cols) {
    return CMapRM<T>(t.data(), static_cast<Eigen::Index>(t.size() / cols),
                     static_cast<Eigen::Index>(cols));
}

template <class T>
void fill_uniform(Tensor<T>& t, Rng& rng, double lo, double hi) {
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<T>(rng.uniform(lo, hi));
}

template <class T>
void fill_normal(Tensor<T>& t, Rng& rng, double mean, double stddev) {
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = static_cast<T>(rng.normal(mean, stddev));
}

template <class T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
    return m;
}

} // namespace reachcast

#endif // REACHCAST_TENSOR_HPP
