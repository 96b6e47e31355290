#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "cruse/datagen/level.hpp"
#include "cruse/dsp/stft.hpp"
#include "cruse/error.hpp"

namespace cruse::metrics {

struct LossConfig {
  double compression = 0.3;  // c
  double blend = 0.3;        // lambda

  void validate() const {
    if (!(compression > 0.0 && compression <= 1.0)) throw ConfigError("LossConfig: compression must be in (0, 1]");
    if (!(blend >= 0.0 && blend <= 1.0)) throw ConfigError("LossConfig: blend must be in [0, 1]");
  }
};

// Divides both signals by the target's active level (linear RMS), so any
// common scale factor cancels.
inline std::pair<std::vector<double>, std::vector<double>> level_normalize_pair(
    std::span<const double> pred, std::span<const double> target, const datagen::ActivityRule& rule = {}) {
  const double scale = 1.0 / datagen::db_to_gain(datagen::estimate_active_level(target, rule));
  std::vector<double> p(pred.size()), t(target.size());
  for (std::size_t i = 0; i < pred.size(); ++i) p[i] = pred[i] * scale;
  for (std::size_t i = 0; i < target.size(); ++i) t[i] = target[i] * scale;
  return {std::move(p), std::move(t)};
}

// The two sums of the compressed loss, before blending.
struct LossTerms {
  double magnitude = 0.0;  // sum (|S|^c - |S^|^c)^2
  double complex = 0.0;    // sum | |S|^c e^{j phi} - |S^|^c e^{j phi^} |^2

  double blended(double blend) const { return (1.0 - blend) * magnitude + blend * complex; }
};

namespace detail {

// |z|^c e^{j arg z}, with 0 mapped to 0.
inline dsp::Complex compress(dsp::Complex z, double c) {
  const double mag = std::abs(z);
  if (mag == 0.0) return {0.0, 0.0};
  return z * (std::pow(mag, c) / mag);
}

}  // namespace detail

inline LossTerms loss_terms(const dsp::ComplexSpectrogram& s, const dsp::ComplexSpectrogram& s_hat,
                            const LossConfig& cfg = {}) {
  cfg.validate();
  if (!s.same_shape(s_hat)) throw ShapeError("loss_ccmse: spectrogram shapes differ");
  LossTerms terms;
  const auto a = s.values();
  const auto b = s_hat.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto ca = detail::compress(a[i], cfg.compression);
    const auto cb = detail::compress(b[i], cfg.compression);
    const double dm = std::abs(ca) - std::abs(cb);
    terms.magnitude += dm * dm;
    terms.complex += std::norm(ca - cb);
  }
  return terms;
}

// Compressed complex/magnitude blended MSE, summed over all bins and frames.
inline double loss_ccmse(const dsp::ComplexSpectrogram& s, const dsp::ComplexSpectrogram& s_hat,
                         const LossConfig& cfg = {}) {
  return loss_terms(s, s_hat, cfg).blended(cfg.blend);
}

// Loss of a predicted spectrum against a time-domain target: the prediction
// goes through istft and back (the consistency path), both signals are
// normalized by the target's active level, and the loss compares their STFTs.
// The target is truncated to the reconstructed length.
inline double training_loss(const dsp::ComplexSpectrogram& pred_spec, std::span<const double> target,
                            const LossConfig& cfg = {}, const dsp::StftConfig& stft_cfg = {}) {
  const auto pred_time = dsp::istft(pred_spec, stft_cfg);
  if (pred_time.empty()) throw ShapeError("training_loss: empty prediction");
  if (target.size() < pred_time.size()) {
    throw ShapeError("training_loss: target shorter than the predicted signal");
  }
  const auto [p, t] = level_normalize_pair(pred_time, target.first(pred_time.size()),
                                           datagen::ActivityRule{stft_cfg.sample_rate});
  return loss_ccmse(dsp::stft(t, stft_cfg), dsp::stft(p, stft_cfg), cfg);
}

}  // namespace cruse::metrics
