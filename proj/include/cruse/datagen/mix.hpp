#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cruse/datagen/level.hpp"
#include "cruse/error.hpp"

namespace cruse::datagen {

inline constexpr double kSegmentLevelDb = -25.0;

// Level-normalizes every segment to level_db, concatenates them and truncates
// to exactly out_len samples. When the segments are too short in total they
// are cycled again from the first one.
inline std::vector<double> assemble_clip(const std::vector<std::vector<double>>& segments,
                                         std::size_t out_len, const ActivityRule& rule = {},
                                         double level_db = kSegmentLevelDb) {
  if (segments.empty()) throw SignalError("assemble_clip: no segments");
  std::vector<std::vector<double>> normalized;
  for (const auto& seg : segments) {
    if (seg.empty()) throw SignalError("assemble_clip: empty segment");
    const double gain = db_to_gain(level_db - estimate_active_level(seg, rule));
    std::vector<double> scaled(seg.size());
    std::transform(seg.begin(), seg.end(), scaled.begin(), [gain](double v) { return v * gain; });
    normalized.push_back(std::move(scaled));
  }
  std::vector<double> clip;
  clip.reserve(out_len);
  for (std::size_t s = 0; clip.size() < out_len; s = (s + 1) % normalized.size()) {
    const auto& seg = normalized[s];
    const std::size_t take = std::min(seg.size(), out_len - clip.size());
    clip.insert(clip.end(), seg.begin(), seg.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return clip;
}

struct Mixture {
  std::vector<double> mixture;
  double noise_scale = 1.0;
};

// Scales noise so that active speech level minus active noise level equals
// snr_db, then adds it to speech.
inline Mixture mix_at_snr(std::span<const double> speech, std::span<const double> noise, double snr_db,
                          const ActivityRule& rule = {}) {
  if (speech.size() != noise.size()) throw ShapeError("mix_at_snr: speech and noise lengths differ");
  if (!std::isfinite(snr_db)) throw ConfigError("mix_at_snr: SNR must be finite");
  const double speech_db = estimate_active_level(speech, rule);
  const double noise_db = estimate_active_level(noise, rule);
  Mixture m;
  m.noise_scale = db_to_gain(speech_db - noise_db - snr_db);
  m.mixture.resize(speech.size());
  for (std::size_t i = 0; i < speech.size(); ++i) m.mixture[i] = speech[i] + m.noise_scale * noise[i];
  return m;
}

struct LeveledPair {
  std::vector<double> mixture;
  std::vector<double> target;
  double factor = 1.0;
  double achieved_level_db = 0.0;
  bool peak_limited = false;
};

// Applies one common factor to mixture and target so the mixture's active
// level equals level_db. If either signal would then peak above `ceiling`,
// the factor is reduced to peak-normalize and the achieved level reported.
inline LeveledPair scale_pair_to_level(std::span<const double> mixture, std::span<const double> target,
                                       double level_db, const ActivityRule& rule = {},
                                       double ceiling = 1.0) {
  if (!std::isfinite(level_db)) throw ConfigError("scale_pair_to_level: level must be finite");
  const double current_db = estimate_active_level(mixture, rule);
  double factor = db_to_gain(level_db - current_db);
  double peak = 0.0;
  for (double v : mixture) peak = std::max(peak, std::abs(v));
  for (double v : target) peak = std::max(peak, std::abs(v));

  LeveledPair out;
  if (peak * factor > ceiling) {
    factor = ceiling / peak;
    out.peak_limited = true;
  }
  out.factor = factor;
  out.achieved_level_db = current_db + 20.0 * std::log10(factor);
  out.mixture.resize(mixture.size());
  out.target.resize(target.size());
  for (std::size_t i = 0; i < mixture.size(); ++i) out.mixture[i] = mixture[i] * factor;
  for (std::size_t i = 0; i < target.size(); ++i) out.target[i] = target[i] * factor;
  return out;
}

}  // namespace cruse::datagen
