// Library usage sample: build a model, profile it, and run the streaming
// enhancer over a WAV file (or a synthetic tone-in-noise signal).
//
//   demo_enhance [input.wav [output.wav]]

#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <vector>

#include "cruse/app/enhancer.hpp"
#include "cruse/dsp/wav.hpp"
#include "cruse/modelzoo/model.hpp"
#include "cruse/profiler/macs.hpp"

int main(int argc, char** argv) {
  try {
    auto model = cruse::modelzoo::build_model(cruse::modelzoo::parse_model_name("CRUSE4-128-1xGRU4"));
    cruse::modelzoo::init_test_weights(model, 1234);  // untrained; load a bundle for real use

    const auto report = cruse::profiler::macs_model(model);
    std::cout << model.name() << ": " << report.parameters << " parameters, " << report.per_frame
              << " MACs/frame\n";

    std::vector<double> input;
    if (argc > 1) {
      input = cruse::dsp::read_wav(argv[1]).samples;
    } else {
      std::mt19937_64 rng(7);
      std::normal_distribution<double> noise(0.0, 0.05);
      for (int i = 0; i < 16000 * 2; ++i) {
        input.push_back(0.3 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0) + noise(rng));
      }
    }

    const auto result = cruse::app::enhance(model, input);
    std::cout << result.frames << " frames, " << result.mean_frame_ms << " ms/frame, real-time factor "
              << result.real_time_factor << "\n";
    if (argc > 2) cruse::dsp::write_wav(argv[2], result.samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
