#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cruse/app/dataset.hpp"
#include "cruse/app/enhancer.hpp"
#include "cruse/app/evaluate.hpp"
#include "cruse/app/selftest.hpp"
#include "cruse/datagen/pipeline.hpp"
#include "cruse/dsp/wav.hpp"
#include "cruse/metrics/quality.hpp"
#include "cruse/modelzoo/bundle.hpp"
#include "cruse/modelzoo/model.hpp"
#include "cruse/profiler/macs.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 1234;
constexpr const char* kDefaultModel = "CRUSE4-128-1xGRU4";

struct Options {
  std::string model;
  std::string bundle;
  std::uint64_t seed = kDefaultSeed;
  std::string format = "text";
  std::size_t count = 0;
  std::string out;

  std::string input;
  std::string save_bundle;
  std::vector<std::string> models;
  std::vector<std::string> model_flags;
  std::string manifest;
  double clip_seconds = 10.0;
  std::string enhanced_dir;
  std::string reference_dir;
  std::string scores;
};

// Data goes to --out when given, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw cruse::Error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

cruse::modelzoo::ModelGraph load_model(const Options& opt) {
  using namespace cruse::modelzoo;
  if (!opt.bundle.empty()) {
    auto graph = load_weights(read_bundle(opt.bundle));
    if (!opt.model.empty() && format_model_name(parse_model_name(opt.model)) != graph.name()) {
      throw cruse::Error("bundle holds " + graph.name() + " but --model asks for " + opt.model);
    }
    return graph;
  }
  const std::string name = opt.model.empty() ? kDefaultModel : opt.model;
  auto graph = build_model(parse_model_name(name));
  init_test_weights(graph, opt.seed);
  std::cerr << "WARNING: no --bundle given; " << graph.name() << " runs with seeded random test weights (seed "
            << opt.seed << "). Output is not enhanced speech; use this for timing only.\n";
  return graph;
}

int cmd_enhance(const Options& opt) {
  if (opt.out.empty()) throw cruse::Error("enhance: --out is required");
  const auto graph = load_model(opt);
  if (!opt.save_bundle.empty()) cruse::modelzoo::write_bundle(opt.save_bundle, cruse::modelzoo::save_weights(graph));
  const auto audio = cruse::dsp::read_wav(opt.input);
  if (audio.sample_rate != 16000) {
    throw cruse::FormatError(opt.input + ": sample rate " + std::to_string(audio.sample_rate) +
                             " Hz; only 16000 Hz is supported (resample first)");
  }
  const auto result = cruse::app::enhance(graph, audio.samples);
  cruse::dsp::write_wav(opt.out, result.samples, audio.sample_rate, audio.format);
  if (opt.format == "csv") {
    std::cout << "model,samples,frames,mean_frame_ms,real_time_factor\n"
              << graph.name() << "," << result.samples.size() << "," << result.frames << "," << std::setprecision(6)
              << result.mean_frame_ms << "," << result.real_time_factor << "\n";
  } else {
    std::cout << "model            " << graph.name() << "\n"
              << "samples          " << result.samples.size() << "\n"
              << "frames           " << result.frames << "\n"
              << std::fixed << std::setprecision(3) << "mean frame time  " << result.mean_frame_ms << " ms\n"
              << "real-time factor " << result.real_time_factor << "\n";
  }
  return 0;
}

int cmd_profile(const Options& opt) {
  auto names = opt.models;
  names.insert(names.end(), opt.model_flags.begin(), opt.model_flags.end());
  if (names.empty()) throw cruse::Error("profile: no model names given");
  std::vector<cruse::profiler::MacReport> reports;
  for (const auto& name : names) {
    reports.push_back(cruse::profiler::macs_model(cruse::modelzoo::parse_model_name(name)));
  }
  Sink sink(opt.out);
  if (opt.format == "csv") {
    cruse::profiler::write_csv(sink.stream(), reports);
  } else {
    cruse::profiler::write_table(sink.stream(), reports);
  }
  return 0;
}

int cmd_datagen(const Options& opt) {
  if (opt.out.empty()) throw cruse::Error("datagen: --out is required");
  cruse::datagen::AssetStore assets;
  if (opt.count > 0) assets = cruse::datagen::load_assets(opt.manifest);
  cruse::datagen::PipelineConfig cfg;
  cfg.clip_seconds = opt.clip_seconds;
  const auto summary = cruse::app::run_datagen(assets, opt.count, opt.out, opt.seed, cfg);
  std::cerr << "wrote " << summary.pairs << " pairs to " << opt.out << " (" << summary.peak_limited
            << " peak-limited); log " << summary.log_path.string() << "\n";
  return 0;
}

int cmd_evaluate(const Options& opt) {
  std::optional<std::map<std::string, cruse::metrics::ExternalScores>> scores;
  if (opt.scores.empty()) {
    std::cerr << "warning: no --scores file; Q (needs external PESQ) is omitted\n";
  } else {
    std::ifstream in(opt.scores);
    if (!in) throw cruse::Error("cannot open scores file " + opt.scores);
    scores = cruse::metrics::parse_scores(in);
  }
  const auto report = cruse::app::evaluate_dirs(opt.enhanced_dir, opt.reference_dir, scores ? &*scores : nullptr);
  Sink sink(opt.out);
  if (opt.format == "csv") {
    cruse::app::write_report_csv(sink.stream(), report);
  } else {
    cruse::app::write_report_table(sink.stream(), report);
  }
  return 0;
}

int cmd_selftest(const Options& opt) {
  const auto report = cruse::app::run_selftest();
  Sink sink(opt.out);
  auto& os = sink.stream();
  if (opt.format == "csv") os << "property,passed,millis,detail\n";
  for (const auto& r : report.results) {
    if (opt.format == "csv") {
      os << r.name << "," << (r.passed ? 1 : 0) << "," << std::fixed << std::setprecision(3) << r.millis << ","
         << r.detail << "\n";
    } else {
      os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(30) << r.name << std::right << std::fixed
         << std::setprecision(2) << std::setw(10) << r.millis << " ms";
      if (!r.detail.empty()) os << "  " << r.detail;
      os << "\n";
    }
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming noise suppression toolkit: enhancement, MAC profiling, training-data synthesis and "
               "objective metrics."};
  app.require_subcommand(1);
  Options opt;

  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"text", "csv"}));
  };

  auto* enhance = app.add_subcommand("enhance", "Enhance a 16 kHz mono WAV file frame by frame.\n"
                                                "CSV columns: model,samples,frames,mean_frame_ms,real_time_factor");
  enhance->add_option("input", opt.input, "Noisy input WAV")->required()->check(CLI::ExistingFile);
  enhance->add_option("--out", opt.out, "Enhanced output WAV")->required();
  enhance->add_option("--model", opt.model, "Model name, e.g. CRUSE4-128-1xGRU4 or NSnet2-500");
  enhance->add_option("--bundle", opt.bundle, "Weight bundle file")->check(CLI::ExistingFile);
  enhance->add_option("--seed", opt.seed, "Seed for test weights when no bundle is given");
  enhance->add_option("--save-bundle", opt.save_bundle, "Also write the weights in use to this bundle file");
  add_format(enhance);

  auto* profile = app.add_subcommand("profile", "Report parameters and MACs per frame.\n"
                                                "CSV columns: model,params,macs_per_frame,macs_per_second");
  profile->add_option("models", opt.models, "Model names");
  profile->add_option("--model", opt.model_flags, "Model name (repeatable)");
  profile->add_option("--out", opt.out, "Write the report here instead of stdout");
  add_format(profile);

  auto* datagen = app.add_subcommand(
      "datagen", "Synthesize noisy/target training pairs from an asset manifest.\n"
                 "Manifest lines: path,kind,t60,c50 with kind speech|noise|rir.\n"
                 "Log columns (recipes.csv): pair,seed,speech,noise,rir,reverberant_speech,snr_db,level_db,"
                 "achieved_level_db,noise_scale,peak_limited");
  datagen->add_option("manifest", opt.manifest, "Asset manifest")->required()->check(CLI::ExistingFile);
  datagen->add_option("--count", opt.count, "Number of pairs")->required();
  datagen->add_option("--out", opt.out, "Output directory")->required();
  datagen->add_option("--seed", opt.seed, "Random seed");
  datagen->add_option("--clip-seconds", opt.clip_seconds, "Clip length in seconds")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "Score enhanced files against same-named references.\n"
                                                  "CSV columns: id,sisdr_db,cd_db,loss[,pesq,q]; last row is the mean.\n"
                                                  "Scores file lines: id,pesq[,dnsmos]");
  evaluate->add_option("enhanced_dir", opt.enhanced_dir, "Directory of enhanced WAVs")->required();
  evaluate->add_option("reference_dir", opt.reference_dir, "Directory of reference WAVs")->required();
  evaluate->add_option("--scores", opt.scores, "External PESQ/DNSMOS scores file")->check(CLI::ExistingFile);
  evaluate->add_option("--out", opt.out, "Write the report here instead of stdout");
  add_format(evaluate);

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks.\n"
                                                  "CSV columns: property,passed,millis,detail");
  selftest->add_option("--out", opt.out, "Write the report here instead of stdout");
  add_format(selftest);

  CLI11_PARSE(app, argc, argv);

  try {
    if (enhance->parsed()) return cmd_enhance(opt);
    if (profile->parsed()) return cmd_profile(opt);
    if (datagen->parsed()) return cmd_datagen(opt);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (selftest->parsed()) return cmd_selftest(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
