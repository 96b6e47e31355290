#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/tensor.hpp"

namespace cruse::nn {

// Fully-connected layer y = W x + b, W stored row-major (out x in).
template <typename T = double>
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t in, std::size_t out) : in_(in), out_(out), weight_(in * out), bias_(out) {}

  std::size_t in_dims() const { return in_; }
  std::size_t out_dims() const { return out_; }

  std::span<T> weight() { return weight_; }
  std::span<const T> weight() const { return weight_; }
  std::span<T> bias() { return bias_; }
  std::span<const T> bias() const { return bias_; }

  std::vector<std::span<T>> parameters() { return {weight_, bias_}; }
  std::vector<std::span<const T>> parameters() const { return {weight_, bias_}; }

  // Pre-activation output.
  std::vector<T> forward(std::span<const T> x) const {
    if (x.size() != in_) throw ShapeError("Dense::forward: input width mismatch");
    std::vector<T> y(bias_.begin(), bias_.end());
    matvec_accumulate<T>(weight_, out_, in_, x, y);
    return y;
  }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  std::vector<T> weight_;
  std::vector<T> bias_;
};

}  // namespace cruse::nn
