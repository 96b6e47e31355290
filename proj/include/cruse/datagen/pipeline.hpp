#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cruse/datagen/level.hpp"
#include "cruse/datagen/mix.hpp"
#include "cruse/datagen/rir.hpp"
#include "cruse/dsp/wav.hpp"
#include "cruse/error.hpp"

namespace cruse::datagen {

struct SpeechAsset {
  std::string id;
  std::vector<double> samples;
  double t60 = 0.0;
  double c50 = 0.0;

  bool reverberant() const { return classify_reverberant(t60, c50); }
};

struct NoiseAsset {
  std::string id;
  std::vector<double> samples;
};

struct RirAsset {
  std::string id;
  RirProfile profile;
};

// Read-only during generation.
struct AssetStore {
  int sample_rate = 16000;
  std::vector<SpeechAsset> speech;
  std::vector<NoiseAsset> noise;
  std::vector<RirAsset> rirs;
};

// Distribution parameters of the synthesis pipeline.
struct PipelineConfig {
  double snr_mean_db = 5.0;
  double snr_std_db = 10.0;
  double level_mean_db = -28.0;
  double level_std_db = 10.0;
  double rir_probability = 0.8;  // for non-reverberant speech
  double clip_seconds = 10.0;
  double t60_max = kDefaultT60Max;
  std::size_t max_segments = 64;
};

// One fully determined synthesis instruction.
struct MixtureRecipe {
  std::vector<std::size_t> speech;
  std::vector<std::size_t> noise;
  std::optional<std::size_t> rir;
  bool reverberant_speech = false;
  double snr_db = 0.0;
  double level_db = -28.0;
  double clip_seconds = 10.0;
  std::uint64_t seed = 0;
};

struct TrainingPair {
  std::vector<double> noisy;
  std::vector<double> target;
  MixtureRecipe recipe;
  double noise_scale = 1.0;
  double level_factor = 1.0;
  double achieved_level_db = 0.0;
  bool peak_limited = false;
};

namespace detail {

template <typename Asset>
std::vector<std::size_t> draw_segments(std::mt19937_64& rng, const std::vector<Asset>& assets,
                                       const std::vector<std::size_t>& pool, std::size_t first,
                                       std::size_t needed, std::size_t max_segments) {
  std::vector<std::size_t> picked{first};
  std::size_t total = assets[first].samples.size();
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  while (total < needed && picked.size() < max_segments) {
    const std::size_t idx = pool[pick(rng)];
    picked.push_back(idx);
    total += assets[idx].samples.size();
  }
  return picked;
}

// A random portion of at most `len` samples from the asset.
inline std::vector<double> portion(const std::vector<double>& x, std::size_t len, std::mt19937_64& rng) {
  if (x.size() <= len) return x;
  std::uniform_int_distribution<std::size_t> start(0, x.size() - len);
  const std::size_t s = start(rng);
  return {x.begin() + static_cast<std::ptrdiff_t>(s), x.begin() + static_cast<std::ptrdiff_t>(s + len)};
}

}  // namespace detail

// Draws one recipe: SNR ~ N(5, 10) dB, mixture level ~ N(-28, 10) dBFS (not
// clipped), reverberant speech used as is, non-reverberant speech convolved
// with a random RIR with probability 0.8.
inline MixtureRecipe sample_recipe(std::mt19937_64& rng, const AssetStore& assets,
                                   const PipelineConfig& cfg = {}) {
  if (assets.speech.empty()) throw Error("sample_recipe: no speech assets");
  if (assets.noise.empty()) throw Error("sample_recipe: no noise assets");
  MixtureRecipe r;
  r.clip_seconds = cfg.clip_seconds;
  r.seed = rng();

  std::uniform_int_distribution<std::size_t> pick_speech(0, assets.speech.size() - 1);
  const std::size_t first = pick_speech(rng);
  r.reverberant_speech = assets.speech[first].reverberant();
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < assets.speech.size(); ++i) {
    if (assets.speech[i].reverberant() == r.reverberant_speech) pool.push_back(i);
  }
  const auto needed = static_cast<std::size_t>(std::lround(cfg.clip_seconds * assets.sample_rate));
  r.speech = detail::draw_segments(rng, assets.speech, pool, first, needed, cfg.max_segments);

  std::vector<std::size_t> noise_pool(assets.noise.size());
  for (std::size_t i = 0; i < noise_pool.size(); ++i) noise_pool[i] = i;
  std::uniform_int_distribution<std::size_t> pick_noise(0, assets.noise.size() - 1);
  r.noise = detail::draw_segments(rng, assets.noise, noise_pool, pick_noise(rng), needed, cfg.max_segments);

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double u = coin(rng);
  if (!r.reverberant_speech && !assets.rirs.empty() && u < cfg.rir_probability) {
    std::uniform_int_distribution<std::size_t> pick_rir(0, assets.rirs.size() - 1);
    r.rir = pick_rir(rng);
  }
  r.snr_db = std::normal_distribution<double>(cfg.snr_mean_db, cfg.snr_std_db)(rng);
  r.level_db = std::normal_distribution<double>(cfg.level_mean_db, cfg.level_std_db)(rng);
  return r;
}

// Synthesizes the (noisy, target) pair described by a recipe. With an RIR the
// noisy speech is the dry clip convolved with the full RIR and the target the
// same clip convolved with the shaped RIR; both share the direct-sound delay.
inline TrainingPair generate_pair(const MixtureRecipe& recipe, const AssetStore& assets,
                                  const PipelineConfig& cfg = {}) {
  if (!(recipe.clip_seconds > 0.0)) throw ConfigError("generate_pair: clip length must be positive");
  if (!std::isfinite(recipe.snr_db) || !std::isfinite(recipe.level_db)) {
    throw ConfigError("generate_pair: SNR and level must be finite");
  }
  const ActivityRule rule{assets.sample_rate};
  const auto len = static_cast<std::size_t>(std::lround(recipe.clip_seconds * assets.sample_rate));
  std::mt19937_64 rng(recipe.seed);

  std::vector<std::vector<double>> speech_parts, noise_parts;
  for (auto idx : recipe.speech) {
    if (idx >= assets.speech.size()) throw Error("generate_pair: missing speech asset " + std::to_string(idx));
    speech_parts.push_back(detail::portion(assets.speech[idx].samples, len, rng));
  }
  for (auto idx : recipe.noise) {
    if (idx >= assets.noise.size()) throw Error("generate_pair: missing noise asset " + std::to_string(idx));
    noise_parts.push_back(detail::portion(assets.noise[idx].samples, len, rng));
  }
  const auto speech = assemble_clip(speech_parts, len, rule);
  const auto noise = assemble_clip(noise_parts, len, rule);

  std::vector<double> reverberant = speech;
  std::vector<double> target = speech;
  if (recipe.rir) {
    if (*recipe.rir >= assets.rirs.size()) {
      throw Error("generate_pair: missing RIR asset " + std::to_string(*recipe.rir));
    }
    const auto& rir = assets.rirs[*recipe.rir].profile;
    const std::size_t t0 = find_direct_sound(rir.samples);
    const auto shaped = shape_rir(rir.samples, t0, rir.sample_rate, cfg.t60_max);
    reverberant = convolve(speech, rir.samples, len);
    target = convolve(speech, shaped, len);
  }

  const auto mixed = mix_at_snr(reverberant, noise, recipe.snr_db, rule);
  auto leveled = scale_pair_to_level(mixed.mixture, target, recipe.level_db, rule);

  TrainingPair pair;
  pair.noisy = std::move(leveled.mixture);
  pair.target = std::move(leveled.target);
  pair.recipe = recipe;
  pair.noise_scale = mixed.noise_scale;
  pair.level_factor = leveled.factor;
  pair.achieved_level_db = leveled.achieved_level_db;
  pair.peak_limited = leveled.peak_limited;
  return pair;
}

enum class AssetKind { speech, noise, rir };

struct ManifestEntry {
  std::filesystem::path path;
  AssetKind kind = AssetKind::speech;
  double t60 = 0.0;
  double c50 = 0.0;
};

// Asset manifest: one asset per line, comma- or tab-separated columns
// path, kind (speech|noise|rir), t60 [s], c50 [dB]. t60/c50 may be empty for
// noise. '#' starts a comment; a first line beginning with "path" is a header.
// Relative paths resolve against base_dir.
inline std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {}) {
  std::vector<ManifestEntry> entries;
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
    if (entries.empty() && !cols.empty() && cols[0] == "path") continue;
    if (cols.size() < 2) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": expected path,kind[,t60,c50]");
    }
    ManifestEntry entry;
    entry.path = cols[0];
    if (entry.path.is_relative()) entry.path = base_dir / entry.path;
    if (cols[1] == "speech") {
      entry.kind = AssetKind::speech;
    } else if (cols[1] == "noise") {
      entry.kind = AssetKind::noise;
    } else if (cols[1] == "rir") {
      entry.kind = AssetKind::rir;
    } else {
      throw ParseError("manifest line " + std::to_string(line_no) + ": unknown kind '" + cols[1] + "'");
    }
    try {
      if (cols.size() > 2 && !cols[2].empty()) entry.t60 = std::stod(cols[2]);
      if (cols.size() > 3 && !cols[3].empty()) entry.c50 = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": t60/c50 must be numeric");
    }
    if (entry.kind == AssetKind::speech && cols.size() < 4) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": speech needs t60 and c50");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

inline AssetStore load_assets(const std::filesystem::path& manifest_path, int sample_rate = 16000) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("cannot open manifest " + manifest_path.string());
  AssetStore store;
  store.sample_rate = sample_rate;
  for (const auto& e : parse_manifest(in, manifest_path.parent_path())) {
    auto audio = dsp::read_wav(e.path);
    if (audio.sample_rate != sample_rate) {
      throw FormatError(e.path.string() + ": sample rate " + std::to_string(audio.sample_rate) +
                        " Hz, expected " + std::to_string(sample_rate));
    }
    const std::string id = e.path.filename().string();
    switch (e.kind) {
      case AssetKind::speech:
        store.speech.push_back({id, std::move(audio.samples), e.t60, e.c50});
        break;
      case AssetKind::noise:
        store.noise.push_back({id, std::move(audio.samples)});
        break;
      case AssetKind::rir:
        store.rirs.push_back({id, {std::move(audio.samples), sample_rate, e.t60, e.c50}});
        break;
    }
  }
  return store;
}

}  // namespace cruse::datagen
