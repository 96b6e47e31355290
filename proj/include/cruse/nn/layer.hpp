#pragma once

#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/nn/activation.hpp"
#include "cruse/nn/conv.hpp"
#include "cruse/nn/dense.hpp"
#include "cruse/nn/recurrent.hpp"
#include "cruse/nn/skip.hpp"

namespace cruse::nn {

enum class LayerKind { fc, gru, lstm, conv2d, tconv2d, parallel_rnn, skip, activation };
enum class RnnKind { gru, lstm };

inline std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::fc: return "fc";
    case LayerKind::gru: return "gru";
    case LayerKind::lstm: return "lstm";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::tconv2d: return "tconv2d";
    case LayerKind::parallel_rnn: return "parallel_rnn";
    case LayerKind::skip: return "skip";
    case LayerKind::activation: return "activation";
  }
  return "fc";
}

inline LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::fc, LayerKind::gru, LayerKind::lstm, LayerKind::conv2d,
                 LayerKind::tconv2d, LayerKind::parallel_rnn, LayerKind::skip,
                 LayerKind::activation}) {
    if (to_string(k) == s) return k;
  }
  throw ParseError("unknown layer kind '" + std::string(s) + "'");
}

inline std::string_view to_string(RnnKind k) { return k == RnnKind::gru ? "gru" : "lstm"; }

inline RnnKind parse_rnn_kind(std::string_view s) {
  if (s == "gru") return RnnKind::gru;
  if (s == "lstm") return RnnKind::lstm;
  throw ParseError("unknown recurrent cell '" + std::string(s) + "'");
}

// Shape-level description of one layer. in_dims/out_dims are feature counts
// for flat layers and channel counts for convolutional layers and skips;
// in_width/out_width are frequency widths (1 for flat layers).
struct LayerSpec {
  LayerKind kind = LayerKind::fc;
  std::size_t in_dims = 0;
  std::size_t out_dims = 0;
  std::size_t in_width = 1;
  std::size_t out_width = 1;
  Extent2 kernel{1, 1};
  Extent2 stride{1, 1};
  Activation activation = Activation::none;
  std::size_t groups = 1;
  RnnKind cell = RnnKind::gru;
  SkipKind skip = SkipKind::none;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;

  std::size_t parameter_count() const {
    switch (kind) {
      case LayerKind::fc:
        return in_dims * out_dims + out_dims;
      case LayerKind::gru:
        return 3 * (in_dims * out_dims + out_dims * out_dims + 2 * out_dims);
      case LayerKind::lstm:
        return 4 * (in_dims * out_dims + out_dims * out_dims + 2 * out_dims);
      case LayerKind::conv2d:
      case LayerKind::tconv2d:
        return kernel.time * kernel.freq * in_dims * out_dims + out_dims;
      case LayerKind::parallel_rnn: {
        const std::size_t w = out_dims / groups;
        const std::size_t gates = cell == RnnKind::gru ? 3 : 4;
        return groups * gates * (2 * w * w + 2 * w);
      }
      case LayerKind::skip:
        return skip == SkipKind::add_conv1x1 ? 2 * in_dims : 0;
      case LayerKind::activation:
        return 0;
    }
    return 0;
  }

  // Canonical one-line description used in weight-bundle manifests.
  std::string describe() const {
    std::ostringstream os;
    os << to_string(kind) << " in=" << in_dims << " out=" << out_dims;
    if (kind == LayerKind::conv2d || kind == LayerKind::tconv2d || kind == LayerKind::skip) {
      os << " in_width=" << in_width << " out_width=" << out_width;
    }
    if (kind == LayerKind::conv2d || kind == LayerKind::tconv2d) {
      os << " kernel=" << kernel.time << "x" << kernel.freq << " stride=" << stride.time << "x"
         << stride.freq;
    }
    if (kind == LayerKind::parallel_rnn) os << " groups=" << groups << " cell=" << to_string(cell);
    if (kind == LayerKind::skip) os << " skip=" << to_string(skip);
    os << " act=" << to_string(activation) << " params=" << parameter_count();
    return os.str();
  }
};

template <typename T = double>
using LayerImpl = std::variant<Dense<T>, Gru<T>, Lstm<T>, Conv2d<T>, TConv2d<T>,
                               ParallelRnn<Gru<T>>, ParallelRnn<Lstm<T>>, SkipConnection<T>>;

template <typename T = double>
using LayerState = std::variant<std::monostate, GruState<T>, LstmState<T>, ConvState<T>,
                                TConvState<T>, std::vector<GruState<T>>, std::vector<LstmState<T>>>;

// Zero-initialized layer with the shapes of spec.
template <typename T = double>
LayerImpl<T> make_layer(const LayerSpec& spec) {
  switch (spec.kind) {
    case LayerKind::fc:
      return Dense<T>(spec.in_dims, spec.out_dims);
    case LayerKind::gru:
      return Gru<T>(spec.in_dims, spec.out_dims);
    case LayerKind::lstm:
      return Lstm<T>(spec.in_dims, spec.out_dims);
    case LayerKind::conv2d: {
      Conv2d<T> conv(spec.in_dims, spec.out_dims, spec.in_width, spec.kernel, spec.stride.freq);
      if (conv.out_width() != spec.out_width) throw ConfigError("conv2d: inconsistent output width");
      return conv;
    }
    case LayerKind::tconv2d:
      return TConv2d<T>(spec.in_dims, spec.out_dims, spec.in_width, spec.out_width, spec.kernel,
                        spec.stride.freq);
    case LayerKind::parallel_rnn:
      if (spec.cell == RnnKind::gru) return ParallelRnn<Gru<T>>(spec.out_dims, spec.groups);
      return ParallelRnn<Lstm<T>>(spec.out_dims, spec.groups);
    case LayerKind::skip:
      return SkipConnection<T>(spec.skip, spec.in_dims, spec.in_width);
    case LayerKind::activation:
      break;
  }
  throw ConfigError("make_layer: standalone activation layers carry no weights");
}

template <typename T>
std::vector<std::span<T>> layer_parameters(LayerImpl<T>& layer) {
  return std::visit([](auto& l) { return l.parameters(); }, layer);
}

template <typename T>
std::vector<std::span<const T>> layer_parameters(const LayerImpl<T>& layer) {
  return std::visit([](const auto& l) { return l.parameters(); }, layer);
}

template <typename T>
LayerState<T> initial_layer_state(const LayerImpl<T>& layer) {
  return std::visit(
      [](const auto& l) -> LayerState<T> {
        if constexpr (requires { l.initial_state(); }) {
          return l.initial_state();
        } else {
          return std::monostate{};
        }
      },
      layer);
}

}  // namespace cruse::nn
