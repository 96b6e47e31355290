#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cruse/dsp/stft.hpp"
#include "cruse/dsp/wav.hpp"
#include "cruse/error.hpp"
#include "cruse/metrics/loss.hpp"
#include "cruse/metrics/quality.hpp"

namespace cruse::app {

struct UtteranceScores {
  std::string id;
  double sisdr = 0.0;
  double cd = 0.0;
  double loss = 0.0;
  std::optional<double> pesq;
  std::optional<double> dnsmos;
  std::optional<double> q;
};

struct EvaluationReport {
  std::vector<UtteranceScores> utterances;
  bool has_q = false;

  UtteranceScores mean() const {
    UtteranceScores m;
    m.id = "mean";
    if (utterances.empty()) return m;
    const double n = static_cast<double>(utterances.size());
    double pesq = 0.0, q = 0.0;
    for (const auto& u : utterances) {
      m.sisdr += u.sisdr / n;
      m.cd += u.cd / n;
      m.loss += u.loss / n;
      if (has_q) {
        pesq += *u.pesq / n;
        q += *u.q / n;
      }
    }
    if (has_q) {
      m.pesq = pesq;
      m.q = q;
    }
    return m;
  }
};

inline std::map<std::string, std::filesystem::path> list_wavs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::map<std::string, std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") {
      files.emplace(entry.path().stem().string(), entry.path());
    }
  }
  return files;
}

inline std::vector<double> read_mono(const std::filesystem::path& path, int sample_rate) {
  auto audio = dsp::read_wav(path);
  if (audio.sample_rate != sample_rate) {
    throw FormatError(path.string() + ": sample rate " + std::to_string(audio.sample_rate) + " Hz, expected " +
                      std::to_string(sample_rate));
  }
  return std::move(audio.samples);
}

// Scores every enhanced file against the same-named reference. Files present
// on one side only are an error. When external scores are given, every
// utterance needs a PESQ entry and Q is reported.
inline EvaluationReport evaluate_dirs(const std::filesystem::path& enhanced_dir,
                                      const std::filesystem::path& reference_dir,
                                      const std::map<std::string, metrics::ExternalScores>* scores = nullptr,
                                      const dsp::StftConfig& stft_cfg = {}) {
  const auto enhanced = list_wavs(enhanced_dir);
  const auto reference = list_wavs(reference_dir);
  std::vector<std::string> orphans;
  for (const auto& [id, path] : enhanced) {
    if (!reference.count(id)) orphans.push_back(path.string());
  }
  for (const auto& [id, path] : reference) {
    if (!enhanced.count(id)) orphans.push_back(path.string());
  }
  if (!orphans.empty()) {
    std::string msg = "unmatched files:";
    for (const auto& o : orphans) msg += " " + o;
    throw Error(msg);
  }

  EvaluationReport report;
  report.has_q = scores != nullptr;
  for (const auto& [id, enh_path] : enhanced) {
    const auto est = read_mono(enh_path, stft_cfg.sample_rate);
    const auto ref = read_mono(reference.at(id), stft_cfg.sample_rate);
    if (est.size() != ref.size()) throw ShapeError(id + ": enhanced and reference lengths differ");
    UtteranceScores u;
    u.id = id;
    u.sisdr = metrics::si_sdr(est, ref);
    u.cd = metrics::cepstral_distance(est, ref, stft_cfg, datagen::ActivityRule{stft_cfg.sample_rate});
    u.loss = metrics::training_loss(dsp::stft(est, stft_cfg), ref, {}, stft_cfg);
    if (scores) {
      const auto it = scores->find(id);
      if (it == scores->end()) throw Error("no external scores for '" + id + "'");
      u.pesq = it->second.pesq;
      u.dnsmos = it->second.dnsmos;
      u.q = metrics::validation_q({*u.pesq, u.sisdr, u.cd, u.dnsmos});
    }
    report.utterances.push_back(std::move(u));
  }
  return report;
}

// id,sisdr_db,cd_db,loss[,pesq,q]; the last row holds the means.
inline void write_report_csv(std::ostream& os, const EvaluationReport& report) {
  os << "id,sisdr_db,cd_db,loss" << (report.has_q ? ",pesq,q" : "") << "\n";
  const auto row = [&](const UtteranceScores& u) {
    os << u.id << "," << std::setprecision(10) << u.sisdr << "," << u.cd << "," << u.loss;
    if (report.has_q) os << "," << *u.pesq << "," << *u.q;
    os << "\n";
  };
  for (const auto& u : report.utterances) row(u);
  row(report.mean());
}

inline void write_report_table(std::ostream& os, const EvaluationReport& report) {
  std::size_t id_w = 4;
  for (const auto& u : report.utterances) id_w = std::max(id_w, u.id.size());
  const auto w = static_cast<int>(id_w);
  os << std::left << std::setw(w) << "id" << std::right << std::setw(12) << "siSDR[dB]" << std::setw(10)
     << "CD[dB]" << std::setw(14) << "loss";
  if (report.has_q) os << std::setw(8) << "PESQ" << std::setw(9) << "Q";
  os << "\n";
  const auto row = [&](const UtteranceScores& u) {
    os << std::left << std::setw(w) << u.id << std::right << std::fixed << std::setprecision(2)
       << std::setw(12) << u.sisdr << std::setw(10) << u.cd << std::setprecision(4) << std::setw(14) << u.loss;
    if (report.has_q) os << std::setprecision(2) << std::setw(8) << *u.pesq << std::setw(9) << *u.q;
    os << std::defaultfloat << "\n";
  };
  for (const auto& u : report.utterances) row(u);
  row(report.mean());
}

}  // namespace cruse::app
