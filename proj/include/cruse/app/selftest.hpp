#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cruse/app/enhancer.hpp"
#include "cruse/datagen/rir.hpp"
#include "cruse/dsp/stft.hpp"
#include "cruse/modelzoo/bundle.hpp"
#include "cruse/modelzoo/model.hpp"
#include "cruse/nn/recurrent.hpp"
#include "cruse/profiler/macs.hpp"

namespace cruse::app {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double millis = 0.0;
  std::string detail;
};

struct SelfTestReport {
  std::vector<PropertyResult> results;

  bool all_passed() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  }
};

namespace detail {

// A check returns an empty string on success, otherwise what went wrong.
using Check = std::function<std::string()>;

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 0.1);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return x;
}

inline std::string check_cola() {
  const dsp::StftConfig cfg;
  const auto w = dsp::make_window(cfg.window_len);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.hop_len; ++i) {
    worst = std::max(worst, std::abs(w[i] * w[i] + w[i + cfg.hop_len] * w[i + cfg.hop_len] - 1.0));
  }
  return worst <= 1e-9 ? "" : "max deviation " + fmt(worst);
}

inline std::string check_round_trip() {
  const dsp::StftConfig cfg;
  const auto x = noise(16000, 1);
  const auto y = dsp::istft(dsp::stft(x, cfg), cfg);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    err += (y[i] - x[i]) * (y[i] - x[i]);
    ref += x[i] * x[i];
  }
  const double rel = std::sqrt(err / ref);
  return rel <= 1e-6 ? "" : "relative error " + fmt(rel);
}

inline std::string check_impulse_delay() {
  const dsp::StftConfig cfg;
  dsp::StreamingStft stream(cfg);
  const std::size_t at = 4 * cfg.hop_len;
  std::vector<double> out;
  for (std::size_t n = 0; n < 10; ++n) {
    std::vector<double> hop(cfg.hop_len, 0.0);
    if (n * cfg.hop_len == at) hop[0] = 1.0;
    const auto y = stream.push(hop, [](std::span<dsp::Complex>) {});
    out.insert(out.end(), y.begin(), y.end());
  }
  const auto peak = static_cast<std::size_t>(
      std::max_element(out.begin(), out.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) -
      out.begin());
  // The output hop holding the impulse is released once that whole hop of
  // input has arrived; latency counts from the impulse's arrival.
  const std::size_t released = (peak / cfg.hop_len + 1) * cfg.hop_len;
  const std::size_t delay = released - at;
  return delay == cfg.window_len ? "" : "delay " + std::to_string(delay) + " samples";
}

inline std::string check_streaming_equivalence() {
  auto graph = modelzoo::build_model(modelzoo::nsnet2(400));
  modelzoo::init_test_weights(graph, 7);
  const auto x = noise(160 * 40, 2);
  const auto streamed = enhance(graph, x).samples;
  const auto offline = enhance_offline(graph, x);
  // The offline inverse lacks overlap for its final hop; compare before it.
  const std::size_t n = offline.size() - 160;
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(streamed[i] - offline[i]));
  return worst <= 1e-9 ? "" : "max deviation " + fmt(worst);
}

inline std::string check_block_diagonal_gru() {
  const std::size_t width = 16, groups = 4, chunk = width / groups;
  nn::ParallelRnn<nn::Gru<double>> parallel(width, groups);
  modelzoo::Lcg64 rng(11);
  for (auto span : parallel.parameters()) {
    for (auto& v : span) v = 5.0 * rng.next_weight();
  }
  // Same weights embedded in one wide cell with block-diagonal matrices.
  nn::Gru<double> wide(width, width);
  for (std::size_t p = 0; p < groups; ++p) {
    const auto& g = parallel.group(p);
    for (std::size_t gate = 0; gate < 3; ++gate) {
      for (std::size_t r = 0; r < chunk; ++r) {
        const std::size_t wr = gate * width + p * chunk + r;
        const std::size_t gr = gate * chunk + r;
        for (std::size_t c = 0; c < chunk; ++c) {
          wide.input_weight()[wr * width + p * chunk + c] = g.input_weight()[gr * chunk + c];
          wide.hidden_weight()[wr * width + p * chunk + c] = g.hidden_weight()[gr * chunk + c];
        }
        wide.input_bias()[wr] = g.input_bias()[gr];
        wide.hidden_bias()[wr] = g.hidden_bias()[gr];
      }
    }
  }
  auto ps = parallel.initial_state();
  auto ws = wide.initial_state();
  const auto x = noise(width * 20, 3);
  double worst = 0.0;
  for (std::size_t t = 0; t < 20; ++t) {
    const std::span<const double> frame(x.data() + t * width, width);
    const auto a = parallel.step(frame, ps);
    const auto b = wide.step(frame, ws);
    for (std::size_t j = 0; j < width; ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  }
  return worst <= 1e-12 ? "" : "max deviation " + fmt(worst);
}

inline std::string check_mac_monotonicity() {
  using modelzoo::parse_model_name;
  const auto macs = [](const char* name) { return profiler::macs_model(parse_model_name(name)).per_frame; };
  if (!(macs("CRUSE4-128-1xGRU4") < macs("CRUSE4-128-1xGRU1"))) return "P=4 not cheaper than P=1";
  if (!(macs("NSnet2-500") > macs("NSnet2-400"))) return "NSnet2-500 not costlier than NSnet2-400";
  if (4 * profiler::macs_gru(256, 256) != 3 * profiler::macs_lstm(256, 256)) return "GRU/LSTM ratio not 0.75";
  return "";
}

inline std::string check_rir_shaping() {
  const double at_t0 = datagen::rir_shaping_weight(100, 100, 16000, 0.3);
  const double later = datagen::rir_shaping_weight(100 + 2400, 100, 16000, 0.3);
  if (std::abs(at_t0 - 1.0) > 1e-12) return "w(t0) = " + fmt(at_t0);
  if (std::abs(later - 1e-3) > 1e-12) return "w(t0 + 0.15 s) = " + fmt(later);
  return "";
}

inline std::string check_bundle_round_trip() {
  auto graph = modelzoo::build_model(modelzoo::parse_model_name("CRUSE2-16-1xGRU2"));
  modelzoo::init_test_weights(graph, 5);
  const auto loaded = modelzoo::load_weights(modelzoo::save_weights(graph));
  const auto a = graph.parameters();
  const auto b = loaded.parameters();
  if (a.size() != b.size()) return "parameter array count differs";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end())) return "weights differ";
  }
  return "";
}

}  // namespace detail

// Runs the built-in invariant checks on generated data and weights only.
inline SelfTestReport run_selftest() {
  const std::vector<std::pair<std::string, detail::Check>> checks = {
      {"stft.cola", detail::check_cola},
      {"stft.round_trip", detail::check_round_trip},
      {"stft.impulse_delay", detail::check_impulse_delay},
      {"model.streaming_equivalence", detail::check_streaming_equivalence},
      {"nn.block_diagonal_gru", detail::check_block_diagonal_gru},
      {"profiler.mac_monotonicity", detail::check_mac_monotonicity},
      {"datagen.rir_shaping", detail::check_rir_shaping},
      {"modelzoo.bundle_round_trip", detail::check_bundle_round_trip},
  };
  SelfTestReport report;
  for (const auto& [name, check] : checks) {
    PropertyResult r;
    r.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      r.detail = check();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace cruse::app
