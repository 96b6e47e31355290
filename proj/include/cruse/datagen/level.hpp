#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cruse/error.hpp"

namespace cruse::datagen {

// Activity-gated level meter: 20 ms frames whose energy is within 40 dB of
// the loudest frame count as active. Homogeneous: scaling the input by a
// shifts the level by exactly 20 log10(a).
struct ActivityRule {
  int sample_rate = 16000;
  double frame_seconds = 0.020;
  double range_db = 40.0;

  std::size_t frame_len() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(frame_seconds * sample_rate)));
  }
};

// Per-frame mean-square energies; a trailing partial frame is its own frame.
inline std::vector<double> frame_energies(std::span<const double> x, std::size_t frame_len) {
  std::vector<double> energies;
  for (std::size_t start = 0; start < x.size(); start += frame_len) {
    const std::size_t n = std::min(frame_len, x.size() - start);
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e += x[start + i] * x[start + i];
    energies.push_back(e / static_cast<double>(n));
  }
  return energies;
}

// Mask of frames whose energy lies within range_db of the loudest one.
inline std::vector<bool> active_frames(std::span<const double> energies, double range_db) {
  const double peak = energies.empty() ? 0.0 : *std::max_element(energies.begin(), energies.end());
  std::vector<bool> mask(energies.size(), false);
  if (!(peak > 0.0)) return mask;
  const double threshold = peak * std::pow(10.0, -range_db / 10.0);
  for (std::size_t i = 0; i < energies.size(); ++i) mask[i] = energies[i] >= threshold;
  return mask;
}

// RMS level in dBFS over active frames (a full-scale constant is 0 dBFS).
inline double estimate_active_level(std::span<const double> x, const ActivityRule& rule = {}) {
  const std::size_t len = rule.frame_len();
  const auto energies = frame_energies(x, len);
  const auto mask = active_frames(energies, rule.range_db);
  double energy = 0.0;
  std::size_t count = 0;
  for (std::size_t f = 0; f < energies.size(); ++f) {
    if (!mask[f]) continue;
    const std::size_t n = std::min(len, x.size() - f * len);
    energy += energies[f] * static_cast<double>(n);
    count += n;
  }
  if (count == 0 || !(energy > 0.0)) throw SignalError("estimate_active_level: signal is silent");
  return 10.0 * std::log10(energy / static_cast<double>(count));
}

inline double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

}  // namespace cruse::datagen
