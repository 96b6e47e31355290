#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/tensor.hpp"

namespace cruse::nn {

// (time, frequency) pair used for kernels and strides.
struct Extent2 {
  std::size_t time = 1;
  std::size_t freq = 1;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

// Output width of a strided frequency convolution with floor(kernel/2) zeros
// padded on each side: 161 -> 81 -> 41 -> 21 -> 11 for kernel 3, stride 2.
inline std::size_t conv_output_width(std::size_t in_width, std::size_t kernel, std::size_t stride) {
  const std::size_t pad = kernel / 2;
  if (in_width + 2 * pad < kernel) return 0;
  return (in_width + 2 * pad - kernel) / stride + 1;
}

// Number of (output bin, frequency tap) pairs a cropped transposed convolution
// actually evaluates. Inputs whose contribution lands in a cropped bin are not
// computed.
inline std::size_t tconv_tap_pairs(std::size_t in_width, std::size_t out_width, std::size_t kernel,
                                   std::size_t stride) {
  const std::size_t full = (in_width - 1) * stride + kernel;
  const std::size_t crop_lo = (full - out_width) / 2;
  std::size_t pairs = 0;
  for (std::size_t m = 0; m < out_width; ++m) {
    const std::size_t j = m + crop_lo;
    for (std::size_t f = 0; f < kernel && f <= j; ++f) {
      if ((j - f) % stride == 0 && (j - f) / stride < in_width) ++pairs;
    }
  }
  return pairs;
}

template <typename T = double>
struct ConvState {
  // Oldest first; holds kernel.time - 1 past input frames.
  std::deque<Tensor<T>> history;
};

// Causal 2-D convolution evaluated one time frame at a time. Time taps span
// the current and kernel.time - 1 previous frames; frequency is zero-padded by
// floor(kernel.freq / 2) on both sides and strided.
// Weight layout: [out][in][time tap][freq tap]; time tap kernel.time - 1 is the
// current frame.
template <typename T = double>
class Conv2d {
 public:
  using State = ConvState<T>;

  Conv2d() = default;
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t in_width, Extent2 kernel,
         std::size_t freq_stride = 2)
      : in_ch_(in_channels),
        out_ch_(out_channels),
        in_width_(in_width),
        out_width_(conv_output_width(in_width, kernel.freq, freq_stride)),
        kernel_(kernel),
        stride_(freq_stride),
        weight_(out_channels * in_channels * kernel.time * kernel.freq),
        bias_(out_channels) {
    if (kernel.time == 0 || kernel.freq == 0 || freq_stride == 0) {
      throw ConfigError("Conv2d: kernel and stride must be positive");
    }
  }

  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }
  std::size_t in_width() const { return in_width_; }
  std::size_t out_width() const { return out_width_; }
  Extent2 kernel() const { return kernel_; }
  std::size_t freq_stride() const { return stride_; }

  T& weight(std::size_t o, std::size_t i, std::size_t t, std::size_t f) {
    return weight_[((o * in_ch_ + i) * kernel_.time + t) * kernel_.freq + f];
  }
  T weight(std::size_t o, std::size_t i, std::size_t t, std::size_t f) const {
    return weight_[((o * in_ch_ + i) * kernel_.time + t) * kernel_.freq + f];
  }
  std::span<T> weights() { return weight_; }
  std::span<T> bias() { return bias_; }
  std::span<const T> bias() const { return bias_; }

  std::vector<std::span<T>> parameters() { return {weight_, bias_}; }
  std::vector<std::span<const T>> parameters() const { return {weight_, bias_}; }

  State initial_state() const {
    State s;
    for (std::size_t t = 0; t + 1 < kernel_.time; ++t) s.history.push_back(Tensor<T>::matrix(in_ch_, in_width_));
    return s;
  }

  Tensor<T> step(const Tensor<T>& x, State& state) const {
    if (x.channels() != in_ch_ || x.width() != in_width_) {
      throw ShapeError("Conv2d::step: expected " + std::to_string(in_ch_) + "x" +
                       std::to_string(in_width_) + " input, got " + std::to_string(x.channels()) +
                       "x" + std::to_string(x.width()));
    }
    if (state.history.size() + 1 != kernel_.time) throw ShapeError("Conv2d::step: state mismatch");

    std::vector<const Tensor<T>*> taps;
    for (const auto& past : state.history) taps.push_back(&past);
    taps.push_back(&x);

    const std::size_t pad = kernel_.freq / 2;
    Tensor<T> y = Tensor<T>::matrix(out_ch_, out_width_);
    for (std::size_t o = 0; o < out_ch_; ++o) {
      T* out = y.channel(o).data();
      std::fill(out, out + out_width_, bias_[o]);
      for (std::size_t i = 0; i < in_ch_; ++i) {
        for (std::size_t t = 0; t < kernel_.time; ++t) {
          const T* in = taps[t]->channel(i).data();
          const T* w = &weight_[((o * in_ch_ + i) * kernel_.time + t) * kernel_.freq];
          for (std::size_t f = 0; f < kernel_.freq; ++f) {
            // Output bins whose tap f lands inside the unpadded input.
            const std::size_t lo = f >= pad ? 0 : (pad - f + stride_ - 1) / stride_;
            if (in_width_ + pad < f + 1) continue;
            const std::size_t hi = std::min(out_width_, (in_width_ + pad - f - 1) / stride_ + 1);
            const T wf = w[f];
            for (std::size_t fo = lo; fo < hi; ++fo) out[fo] += wf * in[fo * stride_ + f - pad];
          }
        }
      }
    }

    if (!state.history.empty()) {
      state.history.pop_front();
      state.history.push_back(x);
    }
    return y;
  }

 private:
  std::size_t in_ch_ = 0;
  std::size_t out_ch_ = 0;
  std::size_t in_width_ = 0;
  std::size_t out_width_ = 0;
  Extent2 kernel_;
  std::size_t stride_ = 2;
  std::vector<T> weight_;
  std::vector<T> bias_;
};

template <typename T = double>
struct TConvState {
  // pending[d] holds contributions already computed for the output d + 1
  // frames ahead.
  std::vector<Tensor<T>> pending;
};

// Transposed 2-D convolution, streaming in time and upsampling in frequency.
// The full frequency output ((F - 1) * stride + kernel.freq bins) is cropped
// to out_width, evenly, with any odd extra bin removed from the high end; only
// the retained bins are evaluated. Time tap 0 feeds the current output, tap d
// the output d frames later.
// Weight layout: [in][out][time tap][freq tap].
template <typename T = double>
class TConv2d {
 public:
  using State = TConvState<T>;

  TConv2d() = default;
  TConv2d(std::size_t in_channels, std::size_t out_channels, std::size_t in_width,
          std::size_t out_width, Extent2 kernel, std::size_t freq_stride = 2)
      : in_ch_(in_channels),
        out_ch_(out_channels),
        in_width_(in_width),
        out_width_(out_width),
        kernel_(kernel),
        stride_(freq_stride),
        weight_(in_channels * out_channels * kernel.time * kernel.freq),
        bias_(out_channels) {
    if (kernel.time == 0 || kernel.freq == 0 || freq_stride == 0 || in_width == 0) {
      throw ConfigError("TConv2d: kernel, stride and input width must be positive");
    }
    const std::size_t full = (in_width - 1) * freq_stride + kernel.freq;
    if (out_width > full || full - out_width >= kernel.freq) {
      throw ConfigError("TConv2d: target width " + std::to_string(out_width) +
                        " incompatible with input width " + std::to_string(in_width) +
                        " (full output " + std::to_string(full) + ")");
    }
    crop_lo_ = (full - out_width) / 2;
  }

  std::size_t in_channels() const { return in_ch_; }
  std::size_t out_channels() const { return out_ch_; }
  std::size_t in_width() const { return in_width_; }
  std::size_t out_width() const { return out_width_; }
  Extent2 kernel() const { return kernel_; }
  std::size_t freq_stride() const { return stride_; }
  std::size_t crop_low() const { return crop_lo_; }

  T& weight(std::size_t i, std::size_t o, std::size_t t, std::size_t f) {
    return weight_[((i * out_ch_ + o) * kernel_.time + t) * kernel_.freq + f];
  }
  T weight(std::size_t i, std::size_t o, std::size_t t, std::size_t f) const {
    return weight_[((i * out_ch_ + o) * kernel_.time + t) * kernel_.freq + f];
  }
  std::span<T> weights() { return weight_; }
  std::span<T> bias() { return bias_; }
  std::span<const T> bias() const { return bias_; }

  std::vector<std::span<T>> parameters() { return {weight_, bias_}; }
  std::vector<std::span<const T>> parameters() const { return {weight_, bias_}; }

  State initial_state() const {
    State s;
    for (std::size_t d = 0; d + 1 < kernel_.time; ++d) s.pending.push_back(Tensor<T>::matrix(out_ch_, out_width_));
    return s;
  }

  Tensor<T> step(const Tensor<T>& x, State& state) const {
    if (x.channels() != in_ch_ || x.width() != in_width_) {
      throw ShapeError("TConv2d::step: expected " + std::to_string(in_ch_) + "x" +
                       std::to_string(in_width_) + " input, got " + std::to_string(x.channels()) +
                       "x" + std::to_string(x.width()));
    }
    if (state.pending.size() + 1 != kernel_.time) throw ShapeError("TConv2d::step: state mismatch");

    std::vector<Tensor<T>> taps(kernel_.time, Tensor<T>::matrix(out_ch_, out_width_));
    for (std::size_t t = 0; t < kernel_.time; ++t) accumulate_tap(x, t, taps[t]);

    Tensor<T> y = std::move(taps[0]);
    for (std::size_t o = 0; o < out_ch_; ++o) {
      auto out = y.channel(o);
      for (auto& v : out) v += bias_[o];
    }
    if (!state.pending.empty()) {
      for (std::size_t n = 0; n < y.size(); ++n) y[n] += state.pending[0][n];
      for (std::size_t d = 0; d + 1 < state.pending.size(); ++d) {
        for (std::size_t n = 0; n < y.size(); ++n) taps[d + 1][n] += state.pending[d + 1][n];
      }
      for (std::size_t d = 0; d < state.pending.size(); ++d) state.pending[d] = std::move(taps[d + 1]);
    }
    return y;
  }

 private:
  // Output bin m receives input bin (m + crop_lo - f) / stride through tap f
  // whenever that quotient is exact and inside the input.
  void accumulate_tap(const Tensor<T>& x, std::size_t t, Tensor<T>& out) const {
    for (std::size_t f = 0; f < kernel_.freq; ++f) {
      std::size_t m0 = 0;
      while (m0 < out_width_ && (m0 + crop_lo_ < f || (m0 + crop_lo_ - f) % stride_ != 0)) ++m0;
      if (m0 >= out_width_) continue;
      const std::size_t src0 = (m0 + crop_lo_ - f) / stride_;
      if (src0 >= in_width_) continue;
      const std::size_t count =
          std::min((out_width_ - m0 + stride_ - 1) / stride_, in_width_ - src0);
      for (std::size_t i = 0; i < in_ch_; ++i) {
        const T* in = x.channel(i).data() + src0;
        for (std::size_t o = 0; o < out_ch_; ++o) {
          const T wf = weight_[((i * out_ch_ + o) * kernel_.time + t) * kernel_.freq + f];
          T* dst = out.channel(o).data() + m0;
          for (std::size_t n = 0; n < count; ++n) dst[n * stride_] += wf * in[n];
        }
      }
    }
  }

  std::size_t in_ch_ = 0;
  std::size_t out_ch_ = 0;
  std::size_t in_width_ = 0;
  std::size_t out_width_ = 0;
  Extent2 kernel_;
  std::size_t stride_ = 2;
  std::size_t crop_lo_ = 0;
  std::vector<T> weight_;
  std::vector<T> bias_;
};

}  // namespace cruse::nn
