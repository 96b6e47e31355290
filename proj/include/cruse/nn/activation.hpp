#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "cruse/error.hpp"

namespace cruse::nn {

enum class Activation { none, relu, leaky_relu, sigmoid };

inline constexpr double kDefaultLeakySlope = 0.2;

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::none: return "none";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "none";
}

inline Activation parse_activation(std::string_view s) {
  if (s == "none") return Activation::none;
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw ParseError("unknown activation '" + std::string(s) + "'");
}

// Input clamped to +-30 so the result stays strictly inside (0, 1) in double
// precision; the deviation from the exact logistic is below 1e-13.
template <typename T>
inline T sigmoid(T x) {
  const T limit = T(30);
  x = x > limit ? limit : (x < -limit ? -limit : x);
  return T{1} / (T{1} + std::exp(-x));
}

template <typename T>
inline void apply_activation(Activation kind, std::span<T> x, T leaky_slope = T(kDefaultLeakySlope)) {
  switch (kind) {
    case Activation::none:
      return;
    case Activation::relu:
      for (auto& v : x) v = v > T{} ? v : T{};
      return;
    case Activation::leaky_relu:
      for (auto& v : x) v = v > T{} ? v : leaky_slope * v;
      return;
    case Activation::sigmoid:
      for (auto& v : x) v = sigmoid(v);
      return;
  }
}

template <typename T>
inline T apply_activation(Activation kind, T x, T leaky_slope = T(kDefaultLeakySlope)) {
  apply_activation(kind, std::span<T>(&x, 1), leaky_slope);
  return x;
}

}  // namespace cruse::nn
