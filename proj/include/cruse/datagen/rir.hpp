#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "cruse/dsp/fft.hpp"
#include "cruse/error.hpp"

namespace cruse::datagen {

struct RirProfile {
  std::vector<double> samples;
  int sample_rate = 16000;
  double t60 = 0.0;  // seconds, metadata
  double c50 = 0.0;  // dB, metadata
};

inline constexpr double kT60Threshold = 0.22;
inline constexpr double kC50Threshold = 18.0;
inline constexpr double kDefaultT60Max = 0.3;

// Speech counts as reverberant when T60 > 0.22 s and C50 < 18 dB.
inline bool classify_reverberant(double t60, double c50) {
  return t60 > kT60Threshold && c50 < kC50Threshold;
}

// Direct sound: first sample with |h| >= 0.5 max |h|.
inline std::size_t find_direct_sound(std::span<const double> rir) {
  double peak = 0.0;
  for (double v : rir) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw SignalError("find_direct_sound: RIR is all zero");
  const double threshold = 0.5 * peak;
  for (std::size_t i = 0; i < rir.size(); ++i) {
    if (std::abs(rir[i]) >= threshold) return i;
  }
  return 0;
}

// w(t) = exp(-(t - t0) * 6 ln(10) / t60_max) from the direct sound on, 1 before.
inline double rir_shaping_weight(std::size_t index, std::size_t t0, int sample_rate, double t60_max) {
  if (index < t0) return 1.0;
  const double t = static_cast<double>(index - t0) / static_cast<double>(sample_rate);
  return std::exp(-t * 6.0 * std::numbers::ln10 / t60_max);
}

inline std::vector<double> shape_rir(std::span<const double> rir, std::size_t t0, int sample_rate,
                                     double t60_max = kDefaultT60Max) {
  if (!(t60_max > 0.0)) throw ConfigError("shape_rir: t60_max must be positive");
  if (sample_rate <= 0) throw ConfigError("shape_rir: sample_rate must be positive");
  std::vector<double> shaped(rir.begin(), rir.end());
  for (std::size_t i = t0; i < shaped.size(); ++i) {
    shaped[i] *= rir_shaping_weight(i, t0, sample_rate, t60_max);
  }
  return shaped;
}

// Full linear convolution truncated to out_len samples, via FFT.
inline std::vector<double> convolve(std::span<const double> x, std::span<const double> h,
                                    std::size_t out_len) {
  if (x.empty() || h.empty()) return std::vector<double>(out_len, 0.0);
  const std::size_t full = x.size() + h.size() - 1;
  std::size_t n = 1;
  while (n < full) n *= 2;
  const dsp::Fft fft(n);
  std::vector<std::complex<double>> a(n), b(n), fa(n), fb(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i];
  for (std::size_t i = 0; i < h.size(); ++i) b[i] = h[i];
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t k = 0; k < n; ++k) fa[k] *= fb[k];
  fft.inverse(fa, a);
  std::vector<double> y(out_len, 0.0);
  for (std::size_t i = 0; i < std::min(out_len, full); ++i) y[i] = a[i].real();
  return y;
}

}  // namespace cruse::datagen
