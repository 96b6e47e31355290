#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "cruse/error.hpp"

namespace cruse::dsp {

// Dense frame-major matrix: one row per STFT frame, one column per bin.
template <typename T>
class FrameMatrix {
 public:
  FrameMatrix() = default;
  FrameMatrix(std::size_t frames, std::size_t bins, T fill = T{})
      : frames_(frames), bins_(bins), values_(frames * bins, fill) {}

  std::size_t frames() const { return frames_; }
  std::size_t bins() const { return bins_; }
  bool empty() const { return frames_ == 0; }

  T& operator()(std::size_t frame, std::size_t bin) { return values_[frame * bins_ + bin]; }
  const T& operator()(std::size_t frame, std::size_t bin) const {
    return values_[frame * bins_ + bin];
  }

  std::span<T> row(std::size_t frame) { return {values_.data() + frame * bins_, bins_}; }
  std::span<const T> row(std::size_t frame) const {
    return {values_.data() + frame * bins_, bins_};
  }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  // Appends one frame; the first append on an empty matrix fixes the width.
  void push_row(std::span<const T> frame) {
    if (frames_ == 0 && bins_ == 0) bins_ = frame.size();
    if (frame.size() != bins_) throw ShapeError("push_row: frame width mismatch");
    values_.insert(values_.end(), frame.begin(), frame.end());
    ++frames_;
  }

  bool same_shape(const FrameMatrix& other) const {
    return frames_ == other.frames_ && bins_ == other.bins_;
  }

  friend bool operator==(const FrameMatrix&, const FrameMatrix&) = default;

 private:
  std::size_t frames_ = 0;
  std::size_t bins_ = 0;
  std::vector<T> values_;
};

using Complex = std::complex<double>;

// S(k, n): complex STFT values.
using ComplexSpectrogram = FrameMatrix<Complex>;
// Log-power network inputs.
using FeatureSequence = FrameMatrix<double>;
// Real suppression gains, one per time-frequency bin.
using GainMask = FrameMatrix<double>;

}  // namespace cruse::dsp
