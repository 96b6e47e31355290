#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cruse/datagen/level.hpp"
#include "cruse/dsp/stft.hpp"
#include "cruse/error.hpp"

namespace cruse::metrics {

inline constexpr double kSiSdrCapDb = 100.0;

// Scale-invariant SDR in dB, clamped to [-100, 100].
inline double si_sdr(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) throw ShapeError("si_sdr: signal lengths differ");
  double dot = 0.0, ref_energy = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    dot += est[i] * ref[i];
    ref_energy += ref[i] * ref[i];
  }
  if (!(ref_energy > 0.0)) throw SignalError("si_sdr: reference is silent");
  const double alpha = dot / ref_energy;
  double target = 0.0, residual = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * ref[i];
    const double e = est[i] - s;
    target += s * s;
    residual += e * e;
  }
  if (residual == 0.0) return target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
  if (target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(target / residual), -kSiSdrCapDb, kSiSdrCapDb);
}

inline constexpr std::size_t kCepstralOrder = 24;

// Real cepstrum coefficients 1..order of one STFT frame, from the natural log
// of the power spectrum (floored at 1e-12) over the full symmetric FFT grid.
inline std::vector<double> frame_cepstrum(std::span<const dsp::Complex> bins, std::size_t fft_len,
                                          std::size_t order = kCepstralOrder) {
  std::vector<double> logp(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) logp[k] = std::log(std::max(std::norm(bins[k]), 1e-12));
  const double n = static_cast<double>(fft_len);
  std::vector<double> c(order);
  for (std::size_t p = 1; p <= order; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < fft_len; ++k) {
      const std::size_t kk = k < bins.size() ? k : fft_len - k;
      acc += logp[kk] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k * p % fft_len) / n);
    }
    c[p - 1] = acc / n;
  }
  return c;
}

namespace detail {

inline std::vector<bool> active_stft_frames(const dsp::ComplexSpectrogram& spec, double range_db) {
  std::vector<double> energy(spec.frames(), 0.0);
  for (std::size_t n = 0; n < spec.frames(); ++n) {
    for (auto v : spec.row(n)) energy[n] += std::norm(v);
  }
  return datagen::active_frames(energy, range_db);
}

}  // namespace detail

// Mean over active frames of (10 / ln 10) sqrt(2 sum_p (c_p - c^_p)^2), p = 1..24.
// A frame is active when it is active in either signal under the level-meter
// rule, which keeps the distance symmetric.
inline double cepstral_distance(std::span<const double> est, std::span<const double> ref,
                                const dsp::StftConfig& stft_cfg = {},
                                const datagen::ActivityRule& rule = {}) {
  if (est.size() != ref.size()) throw ShapeError("cepstral_distance: signal lengths differ");
  const auto se = dsp::stft(est, stft_cfg);
  const auto sr = dsp::stft(ref, stft_cfg);
  const auto ae = detail::active_stft_frames(se, rule.range_db);
  const auto ar = detail::active_stft_frames(sr, rule.range_db);
  const bool est_silent = std::none_of(ae.begin(), ae.end(), [](bool b) { return b; });
  const bool ref_silent = std::none_of(ar.begin(), ar.end(), [](bool b) { return b; });
  if (est_silent || ref_silent) throw SignalError("cepstral_distance: input is silent");

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < se.frames(); ++n) {
    if (!ae[n] && !ar[n]) continue;
    const auto ce = frame_cepstrum(se.row(n), stft_cfg.fft_len);
    const auto cr = frame_cepstrum(sr.row(n), stft_cfg.fft_len);
    double sq = 0.0;
    for (std::size_t p = 0; p < ce.size(); ++p) sq += (ce[p] - cr[p]) * (ce[p] - cr[p]);
    total += 10.0 / std::numbers::ln10 * std::sqrt(2.0 * sq);
    ++count;
  }
  return total / static_cast<double>(count);
}

struct ScoreSet {
  double pesq = 0.0;
  double sisdr = 0.0;
  double cd = 0.0;
  std::optional<double> dnsmos;
};

// Q = PESQ + 0.2 siSDR - CD.
inline double validation_q(const ScoreSet& s) {
  if (!std::isfinite(s.pesq) || !std::isfinite(s.sisdr) || !std::isfinite(s.cd)) {
    throw ConfigError("validation_q: scores must be finite");
  }
  return s.pesq + 0.2 * s.sisdr - s.cd;
}

struct ExternalScores {
  double pesq = 0.0;
  std::optional<double> dnsmos;
};

// Externally computed scores, one utterance per line: id, pesq[, dnsmos].
// Comma- or tab-separated; '#' comments and a header line starting with "id"
// are skipped.
inline std::map<std::string, ExternalScores> parse_scores(std::istream& in) {
  std::map<std::string, ExternalScores> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, sep);) {
      const auto b = col.find_first_not_of(" \t\r");
      const auto e = col.find_last_not_of(" \t\r");
      cols.push_back(b == std::string::npos ? "" : col.substr(b, e - b + 1));
    }
    if (scores.empty() && cols[0] == "id") continue;
    const std::string where = "scores line " + std::to_string(line_no);
    if (cols.size() < 2 || cols[0].empty()) throw ParseError(where + ": expected id,pesq[,dnsmos]");
    ExternalScores s;
    try {
      std::size_t used = 0;
      s.pesq = std::stod(cols[1], &used);
      if (used != cols[1].size()) throw ParseError(where + ": bad pesq value");
      if (cols.size() > 2 && !cols[2].empty()) {
        s.dnsmos = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw ParseError(where + ": bad dnsmos value");
      }
    } catch (const std::logic_error&) {
      throw ParseError(where + ": scores must be numeric");
    }
    if (!std::isfinite(s.pesq) || (s.dnsmos && !std::isfinite(*s.dnsmos))) {
      throw ParseError(where + ": scores must be finite");
    }
    if (!scores.emplace(cols[0], s).second) throw ParseError(where + ": duplicate id '" + cols[0] + "'");
  }
  return scores;
}

}  // namespace cruse::metrics
