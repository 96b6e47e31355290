#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/conv.hpp"
#include "cruse/nn/layer.hpp"
#include "cruse/nn/skip.hpp"

namespace cruse::modelzoo {

enum class Family { nsnet2, cruse };

// Architecture hyper-parameters for one model variant.
struct ModelSpec {
  Family family = Family::cruse;
  std::size_t num_bins = 161;

  // NSnet2: FC(R) - GRU(R) - GRU(R) - FC(600) - FC(600) - FC(K)
  std::size_t rnn_width = 400;
  std::size_t fc_width = 600;

  // CRUSE: L encoder/decoder levels with channels C_1..C_L, N recurrent
  // layers each split into P parallel groups.
  std::vector<std::size_t> channels;
  nn::RnnKind rnn_kind = nn::RnnKind::gru;
  std::size_t rnn_layers = 1;
  std::size_t parallel_groups = 1;
  nn::SkipKind skip = nn::SkipKind::add;
  nn::Extent2 kernel{2, 3};

  std::size_t levels() const { return channels.size(); }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Channel plan 16, 32, 64, ... doubling per level, with the last level free.
inline std::vector<std::size_t> cruse_channels(std::size_t levels, std::size_t last) {
  std::vector<std::size_t> ch;
  std::size_t c = 16;
  for (std::size_t l = 0; l + 1 < levels; ++l, c *= 2) ch.push_back(c);
  ch.push_back(last);
  return ch;
}

inline ModelSpec nsnet2(std::size_t rnn_width, std::size_t num_bins = 161) {
  ModelSpec s;
  s.family = Family::nsnet2;
  s.rnn_width = rnn_width;
  s.num_bins = num_bins;
  return s;
}

inline ModelSpec cruse(std::size_t levels, std::size_t last_channels, std::size_t rnn_layers,
                       nn::RnnKind kind, std::size_t groups,
                       nn::SkipKind skip = nn::SkipKind::add, nn::Extent2 kernel = {2, 3}) {
  ModelSpec s;
  s.family = Family::cruse;
  s.channels = cruse_channels(levels, last_channels);
  s.rnn_layers = rnn_layers;
  s.rnn_kind = kind;
  s.parallel_groups = groups;
  s.skip = skip;
  s.kernel = kernel;
  return s;
}

namespace detail {

inline std::size_t parse_count(std::string_view token, std::string_view what, std::string_view name) {
  std::size_t value = 0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc{} || ptr != end || value == 0) {
    throw ParseError("model name '" + std::string(name) + "': expected positive " +
                     std::string(what) + ", got '" + std::string(token) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Parses "NSnet2-<R>" and "CRUSE<L>-<C_L>-<N>x<GRU|LSTM><P>" with optional
// trailing tokens "-noskip", "-addconv", "-concat" (skip type, default add)
// and "-1D" ((1,3) kernels).
inline ModelSpec parse_model_name(std::string_view name) {
  const auto tokens = detail::split(name, '-');
  if (tokens[0] == "NSnet2") {
    if (tokens.size() != 2) {
      throw ParseError("model name '" + std::string(name) + "': expected NSnet2-<R>");
    }
    return nsnet2(detail::parse_count(tokens[1], "RNN width", name));
  }
  if (tokens[0].substr(0, 5) != "CRUSE") {
    throw ParseError("model name '" + std::string(name) + "': unknown family '" +
                     std::string(tokens[0]) + "'");
  }
  const std::size_t levels = detail::parse_count(tokens[0].substr(5), "layer count", name);
  if (tokens.size() < 3) {
    throw ParseError("model name '" + std::string(name) + "': '" + std::string(tokens.back()) +
                     "' must be followed by -<C_L>-<N>x<RNN><P>");
  }
  const std::size_t last = detail::parse_count(tokens[1], "last-layer channel count", name);

  const std::string_view rnn = tokens[2];
  const auto x = rnn.find('x');
  if (x == std::string_view::npos) {
    throw ParseError("model name '" + std::string(name) + "': recurrent token '" +
                     std::string(rnn) + "' must look like <N>x<GRU|LSTM><P>");
  }
  const std::size_t layers = detail::parse_count(rnn.substr(0, x), "RNN layer count", name);
  std::string_view cell = rnn.substr(x + 1);
  nn::RnnKind kind;
  if (cell.starts_with("GRU")) {
    kind = nn::RnnKind::gru;
    cell.remove_prefix(3);
  } else if (cell.starts_with("LSTM")) {
    kind = nn::RnnKind::lstm;
    cell.remove_prefix(4);
  } else {
    throw ParseError("model name '" + std::string(name) + "': unknown recurrent type in '" +
                     std::string(rnn) + "'");
  }
  const std::size_t groups = detail::parse_count(cell, "parallel group count", name);

  ModelSpec spec = cruse(levels, last, layers, kind, groups);
  bool seen_skip = false, seen_kernel = false;
  for (std::size_t t = 3; t < tokens.size(); ++t) {
    const auto tok = tokens[t];
    if (!seen_skip && (tok == "noskip" || tok == "addconv" || tok == "concat")) {
      spec.skip = tok == "noskip"    ? nn::SkipKind::none
                  : tok == "addconv" ? nn::SkipKind::add_conv1x1
                                     : nn::SkipKind::concat;
      seen_skip = true;
    } else if (!seen_kernel && tok == "1D") {
      spec.kernel = {1, 3};
      seen_kernel = true;
    } else {
      throw ParseError("model name '" + std::string(name) + "': unexpected token '" +
                       std::string(tok) + "'");
    }
  }
  return spec;
}

inline std::string format_model_name(const ModelSpec& spec) {
  if (spec.family == Family::nsnet2) return "NSnet2-" + std::to_string(spec.rnn_width);
  std::string s = "CRUSE" + std::to_string(spec.levels()) + "-" +
                  std::to_string(spec.channels.empty() ? 0 : spec.channels.back()) + "-" +
                  std::to_string(spec.rnn_layers) + "x" +
                  (spec.rnn_kind == nn::RnnKind::gru ? "GRU" : "LSTM") +
                  std::to_string(spec.parallel_groups);
  switch (spec.skip) {
    case nn::SkipKind::none: s += "-noskip"; break;
    case nn::SkipKind::add_conv1x1: s += "-addconv"; break;
    case nn::SkipKind::concat: s += "-concat"; break;
    case nn::SkipKind::add: break;
  }
  if (spec.kernel == nn::Extent2{1, 3}) s += "-1D";
  return s;
}

// Frequency widths along the encoder: widths[0] = K, widths[l] = output of
// encoder level l.
inline std::vector<std::size_t> encoder_widths(const ModelSpec& spec) {
  std::vector<std::size_t> widths{spec.num_bins};
  for (std::size_t l = 0; l < spec.levels(); ++l) {
    widths.push_back(nn::conv_output_width(widths.back(), spec.kernel.freq, 2));
  }
  return widths;
}

// Shape plan of the whole graph in execution order. Throws ConfigError for
// invalid hyper-parameters, including a bottleneck not divisible by P.
inline std::vector<nn::LayerSpec> plan_layers(const ModelSpec& spec) {
  using nn::Activation;
  using nn::LayerKind;
  using nn::LayerSpec;
  if (spec.num_bins == 0) throw ConfigError("model: num_bins must be positive");
  std::vector<LayerSpec> plan;

  if (spec.family == Family::nsnet2) {
    if (spec.rnn_width == 0 || spec.fc_width == 0) throw ConfigError("NSnet2: widths must be positive");
    const std::size_t k = spec.num_bins, r = spec.rnn_width, f = spec.fc_width;
    plan.push_back({.kind = LayerKind::fc, .in_dims = k, .out_dims = r, .activation = Activation::relu});
    plan.push_back({.kind = LayerKind::gru, .in_dims = r, .out_dims = r});
    plan.push_back({.kind = LayerKind::gru, .in_dims = r, .out_dims = r});
    plan.push_back({.kind = LayerKind::fc, .in_dims = r, .out_dims = f, .activation = Activation::relu});
    plan.push_back({.kind = LayerKind::fc, .in_dims = f, .out_dims = f, .activation = Activation::relu});
    plan.push_back({.kind = LayerKind::fc, .in_dims = f, .out_dims = k, .activation = Activation::sigmoid});
    return plan;
  }

  const std::size_t levels = spec.levels();
  if (levels == 0) throw ConfigError("CRUSE: at least one encoder level required");
  for (auto c : spec.channels) {
    if (c == 0) throw ConfigError("CRUSE: channel counts must be positive");
  }
  if (spec.rnn_layers == 0 || spec.parallel_groups == 0) {
    throw ConfigError("CRUSE: RNN layer and group counts must be positive");
  }
  if (!(spec.kernel == nn::Extent2{2, 3} || spec.kernel == nn::Extent2{1, 3})) {
    throw ConfigError("CRUSE: kernel must be (2,3) or (1,3)");
  }
  const auto widths = encoder_widths(spec);
  for (auto w : widths) {
    if (w == 0) throw ConfigError("CRUSE: too many levels for " + std::to_string(spec.num_bins) + " bins");
  }
  auto channels_in = [&](std::size_t l) { return l == 0 ? std::size_t{1} : spec.channels[l - 1]; };

  for (std::size_t l = 0; l < levels; ++l) {
    plan.push_back({.kind = LayerKind::conv2d,
                    .in_dims = channels_in(l),
                    .out_dims = spec.channels[l],
                    .in_width = widths[l],
                    .out_width = widths[l + 1],
                    .kernel = spec.kernel,
                    .stride = {1, 2},
                    .activation = Activation::leaky_relu});
  }
  const std::size_t bottleneck = spec.channels.back() * widths.back();
  if (bottleneck % spec.parallel_groups != 0) {
    throw ConfigError("CRUSE: bottleneck width " + std::to_string(bottleneck) +
                      " is not divisible by " + std::to_string(spec.parallel_groups) +
                      " parallel groups");
  }
  for (std::size_t n = 0; n < spec.rnn_layers; ++n) {
    plan.push_back({.kind = LayerKind::parallel_rnn,
                    .in_dims = bottleneck,
                    .out_dims = bottleneck,
                    .groups = spec.parallel_groups,
                    .cell = spec.rnn_kind});
  }
  for (std::size_t l = levels; l-- > 0;) {
    const std::size_t c = spec.channels[l];
    const std::size_t w = widths[l + 1];
    if (spec.skip != nn::SkipKind::none) {
      plan.push_back({.kind = LayerKind::skip,
                      .in_dims = c,
                      .out_dims = spec.skip == nn::SkipKind::concat ? 2 * c : c,
                      .in_width = w,
                      .out_width = w,
                      .skip = spec.skip});
    }
    plan.push_back({.kind = LayerKind::tconv2d,
                    .in_dims = spec.skip == nn::SkipKind::concat ? 2 * c : c,
                    .out_dims = channels_in(l),
                    .in_width = w,
                    .out_width = widths[l],
                    .kernel = spec.kernel,
                    .stride = {1, 2},
                    .activation = l == 0 ? Activation::sigmoid : Activation::leaky_relu});
  }
  return plan;
}

}  // namespace cruse::modelzoo
