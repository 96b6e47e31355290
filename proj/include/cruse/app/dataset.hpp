#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "cruse/datagen/pipeline.hpp"
#include "cruse/dsp/wav.hpp"
#include "cruse/error.hpp"

namespace cruse::app {

inline constexpr const char* kRecipeLogColumns =
    "pair,seed,speech,noise,rir,reverberant_speech,snr_db,level_db,achieved_level_db,noise_scale,peak_limited";

inline std::string pair_stem(std::size_t index) {
  std::ostringstream os;
  os << "pair_" << std::setw(5) << std::setfill('0') << index;
  return os.str();
}

// One CSV row per generated pair; asset lists are ';'-joined ids.
inline void write_recipe_row(std::ostream& os, std::size_t index, const datagen::TrainingPair& pair,
                             const datagen::AssetStore& assets) {
  const auto& r = pair.recipe;
  os << pair_stem(index) << "," << r.seed << ",";
  for (std::size_t i = 0; i < r.speech.size(); ++i) os << (i ? ";" : "") << assets.speech[r.speech[i]].id;
  os << ",";
  for (std::size_t i = 0; i < r.noise.size(); ++i) os << (i ? ";" : "") << assets.noise[r.noise[i]].id;
  os << "," << (r.rir ? assets.rirs[*r.rir].id : "") << "," << (r.reverberant_speech ? 1 : 0) << ","
     << std::setprecision(17) << r.snr_db << "," << r.level_db << "," << pair.achieved_level_db << ","
     << pair.noise_scale << "," << (pair.peak_limited ? 1 : 0) << "\n";
}

struct DatagenSummary {
  std::size_t pairs = 0;
  std::size_t peak_limited = 0;
  std::filesystem::path log_path;
};

// Writes `count` noisy/target WAV pairs (float32) and recipes.csv into
// out_dir. Recipes are drawn in sequence from one generator seeded with
// `seed`; each pair is then synthesized from its own recipe seed.
inline DatagenSummary run_datagen(const datagen::AssetStore& assets, std::size_t count,
                                  const std::filesystem::path& out_dir, std::uint64_t seed,
                                  const datagen::PipelineConfig& cfg = {}) {
  std::filesystem::create_directories(out_dir);
  DatagenSummary summary;
  summary.log_path = out_dir / "recipes.csv";
  std::ofstream log(summary.log_path);
  if (!log) throw Error("cannot write " + summary.log_path.string());
  log << kRecipeLogColumns << "\n";

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto recipe = datagen::sample_recipe(rng, assets, cfg);
    const auto pair = datagen::generate_pair(recipe, assets, cfg);
    const auto stem = pair_stem(i);
    dsp::write_wav(out_dir / (stem + "_noisy.wav"), pair.noisy, assets.sample_rate, dsp::SampleFormat::float32);
    dsp::write_wav(out_dir / (stem + "_target.wav"), pair.target, assets.sample_rate, dsp::SampleFormat::float32);
    write_recipe_row(log, i, pair, assets);
    ++summary.pairs;
    if (pair.peak_limited) ++summary.peak_limited;
  }
  if (!log) throw Error("failed writing " + summary.log_path.string());
  return summary;
}

}  // namespace cruse::app
