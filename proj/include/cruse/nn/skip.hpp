#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/tensor.hpp"

namespace cruse::nn {

enum class SkipKind { none, add, add_conv1x1, concat };

inline std::string_view to_string(SkipKind k) {
  switch (k) {
    case SkipKind::none: return "none";
    case SkipKind::add: return "add";
    case SkipKind::add_conv1x1: return "add_conv1x1";
    case SkipKind::concat: return "concat";
  }
  return "none";
}

inline SkipKind parse_skip_kind(std::string_view s) {
  if (s == "none") return SkipKind::none;
  if (s == "add") return SkipKind::add;
  if (s == "add_conv1x1") return SkipKind::add_conv1x1;
  if (s == "concat") return SkipKind::concat;
  throw ParseError("unknown skip kind '" + std::string(s) + "'");
}

// Merges an encoder output into the matching decoder input.
//   add:          enc + dec
//   add_conv1x1:  (scale[c] * enc + bias[c]) + dec, one scale/bias per channel
//   concat:       [enc; dec] along channels (2C x F)
//   none:         dec
template <typename T>
Tensor<T> skip_combine(SkipKind kind, const Tensor<T>& enc, const Tensor<T>& dec,
                       std::span<const T> scale = {}, std::span<const T> bias = {}) {
  if (kind == SkipKind::none) return dec;
  if (kind == SkipKind::concat) {
    if (enc.width() != dec.width()) throw ShapeError("skip_combine: concat width mismatch");
    std::vector<T> values(enc.values().begin(), enc.values().end());
    values.insert(values.end(), dec.values().begin(), dec.values().end());
    return Tensor<T>({enc.channels() + dec.channels(), dec.width()}, std::move(values));
  }
  if (enc.shape() != dec.shape()) {
    throw ShapeError("skip_combine: encoder " + std::to_string(enc.channels()) + "x" +
                     std::to_string(enc.width()) + " vs decoder " + std::to_string(dec.channels()) +
                     "x" + std::to_string(dec.width()));
  }
  Tensor<T> out = dec;
  if (kind == SkipKind::add) {
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += enc[n];
    return out;
  }
  if (scale.size() != enc.channels() || bias.size() != enc.channels()) {
    throw ShapeError("skip_combine: add_conv1x1 needs one scale and bias per channel");
  }
  for (std::size_t c = 0; c < out.channels(); ++c) {
    for (std::size_t f = 0; f < out.width(); ++f) out(c, f) += scale[c] * enc(c, f) + bias[c];
  }
  return out;
}

// Trainable channel-wise affine map on the skip path (a 1x1 convolution with
// groups == channels).
template <typename T = double>
class SkipConnection {
 public:
  SkipConnection() = default;
  SkipConnection(SkipKind kind, std::size_t channels, std::size_t width)
      : kind_(kind),
        channels_(channels),
        width_(width),
        scale_(kind == SkipKind::add_conv1x1 ? channels : 0),
        bias_(kind == SkipKind::add_conv1x1 ? channels : 0) {}

  SkipKind kind() const { return kind_; }
  std::size_t channels() const { return channels_; }
  std::size_t width() const { return width_; }
  std::span<T> scale() { return scale_; }
  std::span<T> bias() { return bias_; }

  std::vector<std::span<T>> parameters() {
    if (kind_ != SkipKind::add_conv1x1) return {};
    return {scale_, bias_};
  }
  std::vector<std::span<const T>> parameters() const {
    if (kind_ != SkipKind::add_conv1x1) return {};
    return {scale_, bias_};
  }

  Tensor<T> combine(const Tensor<T>& enc, const Tensor<T>& dec) const {
    return skip_combine<T>(kind_, enc, dec, scale_, bias_);
  }

 private:
  SkipKind kind_ = SkipKind::none;
  std::size_t channels_ = 0;
  std::size_t width_ = 0;
  std::vector<T> scale_;
  std::vector<T> bias_;
};

}  // namespace cruse::nn
