#pragma once

#include <cstddef>
#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cruse/modelzoo/model.hpp"
#include "cruse/modelzoo/model_spec.hpp"
#include "cruse/nn/conv.hpp"
#include "cruse/nn/layer.hpp"

// Multiply-accumulate accounting. Only weight and bias applications count:
// each bias add is one accumulate; activations, STFT and feature extraction
// are excluded.
namespace cruse::profiler {

using Count = std::uint64_t;

inline Count macs_fc(Count in, Count out) { return in * out + out; }

inline Count macs_gru(Count in, Count width) { return 3 * (in * width + width * width + 2 * width); }

inline Count macs_lstm(Count in, Count width) { return 4 * (in * width + width * width + 2 * width); }

inline Count macs_conv2d(nn::Extent2 kernel, Count in_channels, Count out_channels, Count out_width) {
  return kernel.time * kernel.freq * in_channels * out_channels * out_width + out_channels * out_width;
}

// Transposed convolution evaluated only at the retained (cropped) output bins.
inline Count macs_tconv2d(nn::Extent2 kernel, Count in_channels, Count out_channels, Count in_width,
                          Count out_width, Count freq_stride = 2) {
  const Count pairs = nn::tconv_tap_pairs(in_width, out_width, kernel.freq, freq_stride);
  return kernel.time * pairs * in_channels * out_channels + out_channels * out_width;
}

// Channel-wise scale and bias: one multiply and one add per element.
inline Count macs_skip_conv1x1(Count channels, Count width) { return 2 * channels * width; }

inline Count macs_layer(const nn::LayerSpec& s) {
  switch (s.kind) {
    case nn::LayerKind::fc:
      return macs_fc(s.in_dims, s.out_dims);
    case nn::LayerKind::gru:
      return macs_gru(s.in_dims, s.out_dims);
    case nn::LayerKind::lstm:
      return macs_lstm(s.in_dims, s.out_dims);
    case nn::LayerKind::conv2d:
      return macs_conv2d(s.kernel, s.in_dims, s.out_dims, s.out_width);
    case nn::LayerKind::tconv2d:
      return macs_tconv2d(s.kernel, s.in_dims, s.out_dims, s.in_width, s.out_width, s.stride.freq);
    case nn::LayerKind::parallel_rnn: {
      const Count w = s.out_dims / s.groups;
      const Count per_group = s.cell == nn::RnnKind::gru ? macs_gru(w, w) : macs_lstm(w, w);
      return s.groups * per_group;
    }
    case nn::LayerKind::skip:
      return s.skip == nn::SkipKind::add_conv1x1 ? macs_skip_conv1x1(s.in_dims, s.in_width) : 0;
    case nn::LayerKind::activation:
      return 0;
  }
  return 0;
}

struct LayerMacs {
  std::string name;
  Count macs = 0;
  Count parameters = 0;
};

struct MacReport {
  std::string model;
  std::vector<LayerMacs> layers;
  Count per_frame = 0;
  double frames_per_second = 100.0;
  Count parameters = 0;

  double per_second() const { return static_cast<double>(per_frame) * frames_per_second; }
};

inline MacReport macs_model(const std::string& model, const std::vector<nn::LayerSpec>& plan,
                            double frames_per_second = 100.0) {
  MacReport report;
  report.model = model;
  report.frames_per_second = frames_per_second;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    LayerMacs lm;
    lm.name = std::to_string(i) + ":" + std::string(nn::to_string(plan[i].kind));
    lm.macs = macs_layer(plan[i]);
    lm.parameters = plan[i].parameter_count();
    report.per_frame += lm.macs;
    report.parameters += lm.parameters;
    report.layers.push_back(std::move(lm));
  }
  return report;
}

// Shape-only profile; no weights are allocated.
inline MacReport macs_model(const modelzoo::ModelSpec& spec, double frames_per_second = 100.0) {
  return macs_model(modelzoo::format_model_name(spec), modelzoo::plan_layers(spec), frames_per_second);
}

inline MacReport macs_model(const modelzoo::ModelGraph& graph, double frames_per_second = 100.0) {
  std::vector<nn::LayerSpec> plan;
  for (const auto& layer : graph.layers()) plan.push_back(layer.spec);
  return macs_model(graph.name(), plan, frames_per_second);
}

// model, params, MACs/frame, MACs/s
inline void write_csv(std::ostream& os, const std::vector<MacReport>& reports) {
  os << "model,params,macs_per_frame,macs_per_second\n";
  for (const auto& r : reports) {
    os << r.model << "," << r.parameters << "," << r.per_frame << "," << std::fixed
       << std::setprecision(0) << r.per_second() << std::defaultfloat << "\n";
  }
}

inline void write_table(std::ostream& os, const std::vector<MacReport>& reports) {
  std::size_t name_w = 5;
  for (const auto& r : reports) name_w = std::max(name_w, r.model.size());
  os << std::left << std::setw(static_cast<int>(name_w)) << "model" << std::right << std::setw(14)
     << "params" << std::setw(16) << "MACs/frame" << std::setw(18) << "MACs/s" << "\n";
  for (const auto& r : reports) {
    std::ostringstream per_second;
    per_second << std::fixed << std::setprecision(3) << r.per_second() / 1e9 << " G";
    std::ostringstream per_frame;
    per_frame << std::fixed << std::setprecision(3) << static_cast<double>(r.per_frame) / 1e6 << " M";
    os << std::left << std::setw(static_cast<int>(name_w)) << r.model << std::right << std::setw(14)
       << r.parameters << std::setw(16) << per_frame.str() << std::setw(18) << per_second.str() << "\n";
  }
}

}  // namespace cruse::profiler
