#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <vector>

#include "cruse/dsp/stft.hpp"
#include "cruse/error.hpp"
#include "cruse/modelzoo/model.hpp"

namespace cruse::app {

// Real-time suppression loop for one audio stream: each hop is analyzed,
// turned into log-power features, passed through the model and the resulting
// gains applied before overlap-add. Stateful; one instance per stream.
class StreamEnhancer {
 public:
  explicit StreamEnhancer(const modelzoo::ModelGraph& model, const dsp::StftConfig& config = {})
      : model_(model), stft_(config), state_(model.initial_state()), features_(config.num_bins()) {
    if (config.num_bins() != model.input_dims()) {
      throw ConfigError("StreamEnhancer: model expects " + std::to_string(model.input_dims()) +
                        " bins, STFT gives " + std::to_string(config.num_bins()));
    }
  }

  std::size_t hop_len() const { return stft_.config().hop_len; }

  std::vector<double> push(std::span<const double> hop) {
    return stft_.push(hop, [this](std::span<dsp::Complex> spectrum) {
      dsp::log_power_frame(spectrum, features_);
      const auto gains = model_.infer_frame(features_, state_);
      for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= gains[k];
    });
  }

  void reset() {
    stft_.reset();
    state_ = model_.initial_state();
  }

 private:
  const modelzoo::ModelGraph& model_;
  dsp::StreamingStft stft_;
  modelzoo::StreamState state_;
  std::vector<double> features_;
};

struct EnhanceResult {
  std::vector<double> samples;
  std::size_t frames = 0;
  double mean_frame_ms = 0.0;
  double real_time_factor = 0.0;  // processing time / audio duration
};

// Streams a whole signal through StreamEnhancer. The tail is zero-padded so
// every input sample is flushed out, and the one-hop stream delay is removed,
// so the output is sample-aligned with the input and has the same length.
inline EnhanceResult enhance(const modelzoo::ModelGraph& model, std::span<const double> input,
                             const dsp::StftConfig& config = {}) {
  StreamEnhancer enhancer(model, config);
  const std::size_t hop = enhancer.hop_len();
  const std::size_t pushes = (input.size() + hop - 1) / hop + 1;

  EnhanceResult result;
  std::vector<double> out;
  out.reserve(pushes * hop);
  std::vector<double> block(hop);
  std::chrono::steady_clock::duration busy{};
  for (std::size_t n = 0; n < pushes; ++n) {
    for (std::size_t i = 0; i < hop; ++i) {
      const std::size_t src = n * hop + i;
      block[i] = src < input.size() ? input[src] : 0.0;
    }
    const auto start = std::chrono::steady_clock::now();
    const auto chunk = enhancer.push(block);
    busy += std::chrono::steady_clock::now() - start;
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  result.samples.assign(out.begin() + static_cast<std::ptrdiff_t>(hop),
                        out.begin() + static_cast<std::ptrdiff_t>(hop + input.size()));
  result.frames = pushes;
  const double busy_ms = std::chrono::duration<double, std::milli>(busy).count();
  result.mean_frame_ms = busy_ms / static_cast<double>(pushes);
  const double audio_ms = 1000.0 * static_cast<double>(input.size()) / config.sample_rate;
  result.real_time_factor = audio_ms > 0.0 ? busy_ms / audio_ms : 0.0;
  return result;
}

// Offline counterpart: whole-utterance STFT, gains, inverse STFT.
inline std::vector<double> enhance_offline(const modelzoo::ModelGraph& model, std::span<const double> input,
                                           const dsp::StftConfig& config = {}) {
  const auto spec = dsp::stft(input, config);
  const auto gains = model.infer_utterance(dsp::log_power_features(spec));
  return dsp::istft(dsp::apply_gain(spec, gains), config);
}

}  // namespace cruse::app
