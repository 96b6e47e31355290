#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "cruse/dsp/matrix.hpp"
#include "cruse/error.hpp"
#include "cruse/modelzoo/model_spec.hpp"
#include "cruse/nn/activation.hpp"
#include "cruse/nn/layer.hpp"
#include "cruse/nn/tensor.hpp"

namespace cruse::modelzoo {

using Scalar = double;
using Tensor = nn::Tensor<Scalar>;

struct Layer {
  nn::LayerSpec spec;
  nn::LayerImpl<Scalar> impl;
};

// Recurrent and convolutional carry-over for one audio stream.
struct StreamState {
  std::vector<nn::LayerState<Scalar>> layers;
  std::size_t frames = 0;
};

// An executable model graph: the layer plan of a ModelSpec plus weights.
// Weights are immutable during inference, so one graph can serve any number
// of streams, each with its own StreamState.
class ModelGraph {
 public:
  explicit ModelGraph(ModelSpec spec) : spec_(std::move(spec)) {
    for (const auto& ls : plan_layers(spec_)) layers_.push_back({ls, nn::make_layer<Scalar>(ls)});
  }

  const ModelSpec& spec() const { return spec_; }
  std::string name() const { return format_model_name(spec_); }
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }
  std::size_t input_dims() const { return spec_.num_bins; }
  std::size_t output_dims() const { return spec_.num_bins; }

  double leaky_slope() const { return leaky_slope_; }
  void set_leaky_slope(double slope) { leaky_slope_ = slope; }

  // All weight arrays in serialization order.
  std::vector<std::span<Scalar>> parameters() {
    std::vector<std::span<Scalar>> out;
    for (auto& layer : layers_) {
      for (auto s : nn::layer_parameters<Scalar>(layer.impl)) out.push_back(s);
    }
    return out;
  }
  std::vector<std::span<const Scalar>> parameters() const {
    std::vector<std::span<const Scalar>> out;
    for (const auto& layer : layers_) {
      for (auto s : nn::layer_parameters<Scalar>(layer.impl)) out.push_back(s);
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.spec.parameter_count();
    return n;
  }

  StreamState initial_state() const {
    StreamState state;
    for (const auto& layer : layers_) state.layers.push_back(nn::initial_layer_state<Scalar>(layer.impl));
    return state;
  }

  // One causal forward pass: log-power features of the current frame in,
  // suppression gains in (0, 1) out.
  std::vector<Scalar> infer_frame(std::span<const Scalar> features, StreamState& state) const {
    if (features.size() != spec_.num_bins) {
      throw ShapeError("infer_frame: expected " + std::to_string(spec_.num_bins) +
                       " features, got " + std::to_string(features.size()));
    }
    if (state.layers.size() != layers_.size()) throw ShapeError("infer_frame: state built for another graph");

    Tensor x({1, features.size()}, std::vector<Scalar>(features.begin(), features.end()));
    std::vector<Tensor> encoder_outputs;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& spec = layers_[i].spec;
      auto& layer_state = state.layers[i];
      x = std::visit(
          [&](const auto& layer) -> Tensor {
            using L = std::decay_t<decltype(layer)>;
            if constexpr (std::is_same_v<L, nn::Dense<Scalar>>) {
              return flat(layer.forward(x.values()));
            } else if constexpr (std::is_same_v<L, nn::Gru<Scalar>> || std::is_same_v<L, nn::Lstm<Scalar>>) {
              const auto h = layer.step(x.values(), std::get<typename L::State>(layer_state));
              return flat(std::vector<Scalar>(h.begin(), h.end()));
            } else if constexpr (std::is_same_v<L, nn::ParallelRnn<nn::Gru<Scalar>>> ||
                                 std::is_same_v<L, nn::ParallelRnn<nn::Lstm<Scalar>>>) {
              return flat(layer.step(x.values(), std::get<typename L::State>(layer_state)));
            } else if constexpr (std::is_same_v<L, nn::Conv2d<Scalar>>) {
              Tensor y = layer.step(as_planes(x, spec.in_dims, spec.in_width), std::get<typename L::State>(layer_state));
              nn::apply_activation<Scalar>(spec.activation, y.values(), leaky_slope_);
              encoder_outputs.push_back(y);
              return y;
            } else if constexpr (std::is_same_v<L, nn::TConv2d<Scalar>>) {
              Tensor y = layer.step(as_planes(x, spec.in_dims, spec.in_width), std::get<typename L::State>(layer_state));
              nn::apply_activation<Scalar>(spec.activation, y.values(), leaky_slope_);
              return y;
            } else {
              static_assert(std::is_same_v<L, nn::SkipConnection<Scalar>>);
              if (encoder_outputs.empty()) throw ShapeError("infer_frame: skip without encoder output");
              Tensor enc = std::move(encoder_outputs.back());
              encoder_outputs.pop_back();
              return layer.combine(enc, as_planes(x, spec.in_dims, spec.in_width));
            }
          },
          layers_[i].impl);
      if (std::holds_alternative<nn::Dense<Scalar>>(layers_[i].impl)) {
        nn::apply_activation<Scalar>(spec.activation, x.values(), leaky_slope_);
      }
    }
    ++state.frames;
    const auto v = x.values();
    return {v.begin(), v.end()};
  }

  // Whole-utterance convenience: infer_frame from a fresh state, stacked.
  dsp::GainMask infer_utterance(const dsp::FeatureSequence& features) const {
    if (!features.empty() && features.bins() != spec_.num_bins) {
      throw ShapeError("infer_utterance: expected " + std::to_string(spec_.num_bins) + " feature dims");
    }
    dsp::GainMask gains(0, spec_.num_bins);
    auto state = initial_state();
    for (std::size_t n = 0; n < features.frames(); ++n) {
      const auto g = infer_frame(features.row(n), state);
      gains.push_row(g);
    }
    return gains;
  }

 private:
  static Tensor flat(std::vector<Scalar> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  // Channel-major reinterpretation of a flat vector as channels x width.
  static Tensor as_planes(const Tensor& x, std::size_t channels, std::size_t width) {
    if (x.size() != channels * width) throw ShapeError("infer_frame: activation size mismatch");
    if (x.shape().size() == 2 && x.channels() == channels) return x;
    return x.reshaped({channels, width});
  }

  ModelSpec spec_;
  std::vector<Layer> layers_;
  double leaky_slope_ = nn::kDefaultLeakySlope;
};

inline ModelGraph build_model(const ModelSpec& spec) { return ModelGraph(spec); }

// 64-bit LCG used for reproducible test weights.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ULL;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ULL;

  explicit Lcg64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  // Top 23 bits mapped to the open interval (-0.1, 0.1), rounded to float so
  // the value survives the float32 weight blob unchanged.
  double next_weight() {
    const double u = (static_cast<double>(next() >> 41) + 0.5) / 8388608.0;
    return static_cast<double>(static_cast<float>(0.2 * u - 0.1));
  }

 private:
  std::uint64_t state_;
};

// Fills every weight, in serialization order, from Lcg64(seed).
inline void init_test_weights(ModelGraph& graph, std::uint64_t seed) {
  Lcg64 rng(seed);
  for (auto span : graph.parameters()) {
    for (auto& w : span) w = rng.next_weight();
  }
}

}  // namespace cruse::modelzoo
