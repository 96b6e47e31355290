#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "cruse/dsp/fft.hpp"
#include "cruse/dsp/matrix.hpp"
#include "cruse/error.hpp"

namespace cruse::dsp {

struct StftConfig {
  int sample_rate = 16000;
  std::size_t window_len = 320;
  std::size_t hop_len = 160;
  std::size_t fft_len = 320;

  std::size_t num_bins() const { return fft_len / 2 + 1; }
  // Frames per second of audio; 100 for the 16 kHz / 160-sample default.
  double frame_rate() const { return static_cast<double>(sample_rate) / static_cast<double>(hop_len); }
  // Zeros prepended before framing so frame n ends at sample (n + 1) * hop.
  std::size_t head_pad() const { return window_len - hop_len; }

  void validate() const {
    if (sample_rate <= 0) throw ConfigError("StftConfig: sample_rate must be positive");
    if (window_len < 2 || window_len % 2 != 0) {
      throw ConfigError("StftConfig: window_len must be even and >= 2");
    }
    if (hop_len * 2 != window_len) throw ConfigError("StftConfig: hop_len must be window_len / 2");
    if (fft_len < window_len) throw ConfigError("StftConfig: fft_len must be >= window_len");
  }
};

// Square root of the periodic Hann window. With 50% overlap the squared window
// sums to one at every sample, so the same vector serves analysis and synthesis.
inline std::vector<double> make_window(std::size_t window_len) {
  if (window_len < 2 || window_len % 2 != 0) {
    throw ConfigError("make_window: window_len must be even and >= 2");
  }
  std::vector<double> w(window_len);
  const double n = static_cast<double>(window_len);
  for (std::size_t i = 0; i < window_len; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / n);
    w[i] = std::sqrt(hann);
  }
  return w;
}

namespace detail {

inline void analyze_frame(const Fft& fft, std::span<const double> window,
                          std::span<const double> frame, std::span<Complex> out) {
  std::vector<double> buf(fft.size(), 0.0);
  for (std::size_t i = 0; i < window.size(); ++i) buf[i] = frame[i] * window[i];
  const auto spec = fft.forward_real(buf);
  std::copy(spec.begin(), spec.end(), out.begin());
}

}  // namespace detail

// Causal STFT. The head is padded with window_len - hop_len zeros, trailing
// samples that do not fill a hop are dropped: frames = floor(len / hop).
inline ComplexSpectrogram stft(std::span<const double> samples, const StftConfig& config) {
  config.validate();
  if (samples.size() < config.hop_len) throw ShapeError("stft: input shorter than one hop");
  const std::size_t pad = config.head_pad();
  const std::size_t padded_len = samples.size() + pad;
  const std::size_t frames = (padded_len - config.window_len) / config.hop_len + 1;

  std::vector<double> padded(padded_len, 0.0);
  std::copy(samples.begin(), samples.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));

  const auto window = make_window(config.window_len);
  const Fft fft(config.fft_len);
  ComplexSpectrogram spec(frames, config.num_bins());
  for (std::size_t n = 0; n < frames; ++n) {
    const std::span<const double> frame(padded.data() + n * config.hop_len, config.window_len);
    detail::analyze_frame(fft, window, frame, spec.row(n));
  }
  return spec;
}

// Weighted overlap-add inverse. Output length is frames * hop (the overlap-add
// span minus the head pad). Samples are divided by the summed squared window,
// which is exactly one everywhere except the final hop; this makes istft a
// left inverse of stft on every sample stft consumed.
inline std::vector<double> istft(const ComplexSpectrogram& spec, const StftConfig& config) {
  config.validate();
  if (spec.bins() != config.num_bins()) throw ShapeError("istft: bin count does not match config");
  const std::size_t frames = spec.frames();
  if (frames == 0) return {};
  const std::size_t pad = config.head_pad();
  const std::size_t ola_len = (frames - 1) * config.hop_len + config.window_len;

  const auto window = make_window(config.window_len);
  const Fft fft(config.fft_len);
  std::vector<double> ola(ola_len, 0.0);
  std::vector<double> norm(ola_len, 0.0);
  for (std::size_t n = 0; n < frames; ++n) {
    const auto frame = fft.inverse_real(spec.row(n));
    const std::size_t start = n * config.hop_len;
    for (std::size_t i = 0; i < config.window_len; ++i) {
      ola[start + i] += frame[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(ola_len - pad);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double wsum = norm[i + pad];
    out[i] = wsum > 1e-12 ? ola[i + pad] / wsum : 0.0;
  }
  return out;
}

// ln(max(|S|^2, floor)) per bin.
inline FeatureSequence log_power_features(const ComplexSpectrogram& spec, double floor = 1e-12) {
  if (!(floor > 0.0)) throw ConfigError("log_power_features: floor must be positive");
  FeatureSequence features(spec.frames(), spec.bins());
  for (std::size_t n = 0; n < spec.frames(); ++n) {
    for (std::size_t k = 0; k < spec.bins(); ++k) {
      features(n, k) = std::log(std::max(std::norm(spec(n, k)), floor));
    }
  }
  return features;
}

inline void log_power_frame(std::span<const Complex> bins, std::span<double> out,
                            double floor = 1e-12) {
  if (bins.size() != out.size()) throw ShapeError("log_power_frame: size mismatch");
  for (std::size_t k = 0; k < bins.size(); ++k) out[k] = std::log(std::max(std::norm(bins[k]), floor));
}

inline ComplexSpectrogram apply_gain(const ComplexSpectrogram& spec, const GainMask& gains) {
  if (spec.frames() != gains.frames() || spec.bins() != gains.bins()) {
    throw ShapeError("apply_gain: spectrogram and gain mask shapes differ");
  }
  ComplexSpectrogram out(spec.frames(), spec.bins());
  for (std::size_t n = 0; n < spec.frames(); ++n) {
    for (std::size_t k = 0; k < spec.bins(); ++k) out(n, k) = gains(n, k) * spec(n, k);
  }
  return out;
}

// Projection onto the set of consistent spectrograms: stft(istft(spec)).
inline ComplexSpectrogram consistency_project(const ComplexSpectrogram& spec,
                                              const StftConfig& config) {
  const auto time = istft(spec, config);
  if (time.empty()) return ComplexSpectrogram(0, config.num_bins());
  return stft(time, config);
}

// Frame-by-frame analysis/synthesis for real-time use. push() consumes one hop
// of input, hands the current frame's spectrum to a callback that may modify it
// in place, and returns one hop of finished output. Output sample j corresponds
// to input sample j - hop_len, so a sample arriving at the start of a hop is
// emitted window_len samples later.
class StreamingStft {
 public:
  explicit StreamingStft(const StftConfig& config = {})
      : config_(config),
        window_(make_window((config.validate(), config.window_len))),
        fft_(config.fft_len),
        input_(config.window_len, 0.0),
        overlap_(config.window_len, 0.0) {}

  const StftConfig& config() const { return config_; }

  template <typename Fn>
  std::vector<double> push(std::span<const double> hop, Fn&& process) {
    const std::size_t h = config_.hop_len;
    if (hop.size() != h) throw ShapeError("StreamingStft::push: expected exactly one hop");
    std::move(input_.begin() + static_cast<std::ptrdiff_t>(h), input_.end(), input_.begin());
    std::copy(hop.begin(), hop.end(), input_.end() - static_cast<std::ptrdiff_t>(h));

    std::vector<Complex> spectrum(config_.num_bins());
    detail::analyze_frame(fft_, window_, input_, spectrum);
    process(std::span<Complex>(spectrum));
    const auto frame = fft_.inverse_real(spectrum);
    for (std::size_t i = 0; i < config_.window_len; ++i) overlap_[i] += frame[i] * window_[i];

    std::vector<double> out(overlap_.begin(), overlap_.begin() + static_cast<std::ptrdiff_t>(h));
    std::move(overlap_.begin() + static_cast<std::ptrdiff_t>(h), overlap_.end(), overlap_.begin());
    std::fill(overlap_.end() - static_cast<std::ptrdiff_t>(h), overlap_.end(), 0.0);
    return out;
  }

  void reset() {
    std::fill(input_.begin(), input_.end(), 0.0);
    std::fill(overlap_.begin(), overlap_.end(), 0.0);
  }

 private:
  StftConfig config_;
  std::vector<double> window_;
  Fft fft_;
  std::vector<double> input_;
  std::vector<double> overlap_;
};

}  // namespace cruse::dsp
