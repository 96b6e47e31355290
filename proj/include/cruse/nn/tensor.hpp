#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "cruse/error.hpp"

namespace cruse::nn {

// Row-major real array. Per-frame convolutional activations use shape
// {channels, frequency}; recurrent and dense activations are flat {n}.
template <typename T = double>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)), values_(count(shape_), fill) {}
  Tensor(std::vector<std::size_t> shape, std::vector<T> values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    if (values_.size() != count(shape_)) throw ShapeError("Tensor: value count != product of shape");
  }

  static Tensor matrix(std::size_t channels, std::size_t width, T fill = T{}) {
    return Tensor({channels, width}, fill);
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  std::size_t channels() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t width() const { return shape_.empty() ? 0 : shape_.back(); }

  T& operator()(std::size_t c, std::size_t f) { return values_[c * width() + f]; }
  const T& operator()(std::size_t c, std::size_t f) const { return values_[c * width() + f]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> channel(std::size_t c) { return {values_.data() + c * width(), width()}; }
  std::span<const T> channel(std::size_t c) const { return {values_.data() + c * width(), width()}; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  // Same values under a new shape; used to flatten the bottleneck.
  Tensor reshaped(std::vector<std::size_t> shape) const { return Tensor(std::move(shape), values_); }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> shape_;
  std::vector<T> values_;
};

// y[r] += sum_c m[r * cols + c] * x[c] for a row-major (rows x cols) matrix.
// Four independent partial sums per row; the summation order is fixed, so
// results are reproducible across calls.
template <typename T>
inline void matvec_accumulate(std::span<const T> m, std::size_t rows, std::size_t cols,
                              std::span<const T> x, std::span<T> y) {
  const T* xv = x.data();
  const std::size_t body = cols - cols % 4;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = m.data() + r * cols;
    T a0{}, a1{}, a2{}, a3{};
    for (std::size_t c = 0; c < body; c += 4) {
      a0 += row[c] * xv[c];
      a1 += row[c + 1] * xv[c + 1];
      a2 += row[c + 2] * xv[c + 2];
      a3 += row[c + 3] * xv[c + 3];
    }
    for (std::size_t c = body; c < cols; ++c) a0 += row[c] * xv[c];
    y[r] += (a0 + a1) + (a2 + a3);
  }
}

}  // namespace cruse::nn
