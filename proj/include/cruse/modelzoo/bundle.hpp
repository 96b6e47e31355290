#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cruse/error.hpp"
#include "cruse/modelzoo/model.hpp"

namespace cruse::modelzoo {

static_assert(std::endian::native == std::endian::little, "weight blobs are little-endian");

// A serialized model: a line-oriented text manifest describing the graph and
// its conventions, plus float32 little-endian weights in manifest order.
// Matrices are row-major (out x in); gate blocks are stacked r,z,n (GRU) and
// i,f,g,o (LSTM).
struct WeightBundle {
  std::string manifest;
  std::vector<std::uint8_t> blob;
};

inline constexpr char kBundleMagic[8] = {'C', 'R', 'U', 'S', 'E', 'W', 'B', '1'};
inline constexpr const char* kManifestHeader = "cruse-weights 1";

namespace detail {

inline const std::map<std::string, std::string>& fixed_conventions() {
  static const std::map<std::string, std::string> conventions = {
      {"gru_gates", "r,z,n reset_after"},
      {"lstm_gates", "i,f,g,o"},
      {"freq_padding", "symmetric floor(kernel/2)"},
      {"tconv_crop", "even high_extra"},
      {"flatten", "channel_major"},
      {"layout", "float32 little_endian row_major"},
  };
  return conventions;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

}  // namespace detail

inline std::string make_manifest(const ModelGraph& graph) {
  std::ostringstream os;
  os << kManifestHeader << "\n";
  os << "model " << graph.name() << "\n";
  os << "num_bins " << graph.spec().num_bins << "\n";
  for (const auto& [key, value] : detail::fixed_conventions()) os << key << " " << value << "\n";
  os << "leaky_relu_slope " << std::hexfloat << graph.leaky_slope() << std::defaultfloat << "\n";
  for (std::size_t i = 0; i < graph.layers().size(); ++i) {
    os << "layer " << i << " " << graph.layers()[i].spec.describe() << "\n";
  }
  os << "parameters " << graph.parameter_count() << "\n";
  return os.str();
}

inline WeightBundle save_weights(const ModelGraph& graph) {
  WeightBundle bundle{make_manifest(graph), {}};
  bundle.blob.reserve(graph.parameter_count() * 4);
  for (auto span : graph.parameters()) {
    for (double w : span) {
      const auto f = static_cast<float>(w);
      std::uint8_t bytes[4];
      std::memcpy(bytes, &f, 4);
      bundle.blob.insert(bundle.blob.end(), bytes, bytes + 4);
    }
  }
  return bundle;
}

inline ModelGraph load_weights(const WeightBundle& bundle) {
  std::istringstream in(bundle.manifest);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kManifestHeader) {
    throw FormatError("bundle: manifest must start with '" + std::string(kManifestHeader) + "'");
  }

  std::string model_name;
  std::size_t num_bins = 161;
  double slope = nn::kDefaultLeakySlope;
  std::vector<std::string> layer_lines;
  long long declared_params = -1;
  std::map<std::string, std::string> conventions;
  while (std::getline(in, line)) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    const std::string key = line.substr(0, sp);
    const std::string value = sp == std::string::npos ? "" : detail::trim(line.substr(sp + 1));
    if (key == "model") {
      model_name = value;
    } else if (key == "num_bins") {
      num_bins = std::stoul(value);
    } else if (key == "leaky_relu_slope") {
      slope = std::strtod(value.c_str(), nullptr);
    } else if (key == "layer") {
      const auto sp2 = value.find(' ');
      if (sp2 == std::string::npos) throw FormatError("bundle: malformed layer line '" + line + "'");
      const std::string kind = value.substr(sp2 + 1, value.find(' ', sp2 + 1) - sp2 - 1);
      nn::parse_layer_kind(kind);
      layer_lines.push_back(detail::trim(value.substr(sp2 + 1)));
    } else if (key == "parameters") {
      declared_params = std::stoll(value);
    } else if (detail::fixed_conventions().count(key) != 0) {
      conventions[key] = value;
    } else {
      throw FormatError("bundle: unknown manifest key '" + key + "'");
    }
  }
  if (model_name.empty()) throw FormatError("bundle: manifest has no model line");
  for (const auto& [key, value] : detail::fixed_conventions()) {
    const auto it = conventions.find(key);
    if (it != conventions.end() && it->second != value) {
      throw FormatError("bundle: unsupported convention " + key + " '" + it->second +
                        "' (expected '" + value + "')");
    }
  }

  ModelSpec spec = parse_model_name(model_name);
  spec.num_bins = num_bins;
  ModelGraph graph(spec);
  graph.set_leaky_slope(slope);

  const auto& layers = graph.layers();
  if (layer_lines.size() != layers.size()) {
    throw FormatError("bundle: manifest lists " + std::to_string(layer_lines.size()) +
                      " layers but " + model_name + " has " + std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto expected = layers[i].spec.describe();
    if (layer_lines[i] != expected) {
      throw FormatError("bundle: layer " + std::to_string(i) + " is '" + layer_lines[i] +
                        "' but " + model_name + " expects '" + expected + "'");
    }
  }
  const std::size_t count = graph.parameter_count();
  if (declared_params >= 0 && static_cast<std::size_t>(declared_params) != count) {
    throw FormatError("bundle: manifest declares " + std::to_string(declared_params) +
                      " parameters but " + model_name + " has " + std::to_string(count));
  }
  if (bundle.blob.size() != count * 4) {
    throw FormatError("bundle: blob holds " + std::to_string(bundle.blob.size()) + " bytes, expected " +
                      std::to_string(count * 4) + " (" + std::to_string(count) + " float32 parameters)");
  }

  std::size_t offset = 0;
  for (auto span : graph.parameters()) {
    for (auto& w : span) {
      float f;
      std::memcpy(&f, bundle.blob.data() + offset, 4);
      offset += 4;
      w = static_cast<double>(f);
    }
  }
  return graph;
}

// On-disk layout: 8-byte magic, uint64 manifest length, manifest, blob.
inline void write_bundle(const std::filesystem::path& path, const WeightBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("bundle: cannot create " + path.string());
  const std::uint64_t len = bundle.manifest.size();
  out.write(kBundleMagic, 8);
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(bundle.manifest.data(), static_cast<std::streamsize>(len));
  out.write(reinterpret_cast<const char*>(bundle.blob.data()), static_cast<std::streamsize>(bundle.blob.size()));
  if (!out) throw FormatError("bundle: write failed for " + path.string());
}

inline WeightBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("bundle: cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kBundleMagic, 8) != 0) {
    throw FormatError("bundle: " + path.string() + " is not a weight bundle");
  }
  std::uint64_t len;
  std::memcpy(&len, bytes.data() + 8, 8);
  if (len > bytes.size() - 16) throw FormatError("bundle: truncated manifest in " + path.string());
  WeightBundle bundle;
  bundle.manifest.assign(bytes.data() + 16, len);
  bundle.blob.assign(bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len), bytes.end());
  return bundle;
}

}  // namespace cruse::modelzoo
