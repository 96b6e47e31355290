#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "cruse/modelzoo/bundle.hpp"
#include "cruse/modelzoo/model.hpp"
#include "cruse/modelzoo/model_spec.hpp"
#include "support/batch_reference.hpp"
#include "support/util.hpp"

using namespace cruse::modelzoo;
using cruse::dsp::FeatureSequence;

namespace {

FeatureSequence random_features(std::size_t frames, std::uint64_t seed) {
  FeatureSequence f(frames, 161);
  const auto v = testutil::uniform(frames * 161, seed, -8.0, 2.0);
  std::copy(v.begin(), v.end(), f.values().begin());
  return f;
}

ModelGraph seeded(const std::string& name, std::uint64_t seed = 1234) {
  auto g = build_model(parse_model_name(name));
  init_test_weights(g, seed);
  return g;
}

std::vector<double> flat_weights(const ModelGraph& g) {
  std::vector<double> out;
  for (auto s : g.parameters()) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

TEST(ModelName, ParsesCruse) {
  const auto s = parse_model_name("CRUSE4-120-1xGRU4");
  EXPECT_EQ(s.family, Family::cruse);
  EXPECT_EQ(s.channels, (std::vector<std::size_t>{16, 32, 64, 120}));
  EXPECT_EQ(s.rnn_layers, 1u);
  EXPECT_EQ(s.rnn_kind, cruse::nn::RnnKind::gru);
  EXPECT_EQ(s.parallel_groups, 4u);
  EXPECT_EQ(s.skip, cruse::nn::SkipKind::add);

  const auto l = parse_model_name("CRUSE3-64-2xLSTM1-concat-1D");
  EXPECT_EQ(l.channels, (std::vector<std::size_t>{16, 32, 64}));
  EXPECT_EQ(l.rnn_kind, cruse::nn::RnnKind::lstm);
  EXPECT_EQ(l.rnn_layers, 2u);
  EXPECT_EQ(l.skip, cruse::nn::SkipKind::concat);
  EXPECT_EQ(l.kernel, (cruse::nn::Extent2{1, 3}));
}

TEST(ModelName, ParsesNsnet2) {
  const auto s = parse_model_name("NSnet2-400");
  EXPECT_EQ(s.family, Family::nsnet2);
  EXPECT_EQ(s.rnn_width, 400u);
}

TEST(ModelName, RejectsMalformed) {
  for (const char* bad : {"CRUSE9", "CRUSE", "NSnet2", "NSnet2-", "NSnet2-abc", "CRUSE4-128-1xRNN4", "CRUSE4-128-GRU4",
                          "CRUSE4-128-1xGRU4-bogus", "FOO4-1-1xGRU1", "CRUSE4-128-1xGRU4-concat-concat", ""}) {
    EXPECT_THROW(parse_model_name(bad), cruse::ParseError) << bad;
  }
  try {
    parse_model_name("CRUSE4-128-1xGRU4-bogus");
  } catch (const cruse::ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos);
  }
}

TEST(ModelName, FormatRoundTrip) {
  for (const char* name : {"CRUSE4-120-1xGRU4", "CRUSE4-128-1xGRU1", "CRUSE5-256-2xLSTM2", "CRUSE4-128-1xGRU4-noskip",
                           "CRUSE4-128-1xGRU4-addconv", "CRUSE4-128-1xGRU4-concat", "CRUSE2-16-1xGRU2-1D",
                           "NSnet2-400", "NSnet2-500"}) {
    EXPECT_EQ(format_model_name(parse_model_name(name)), name);
  }
}

TEST(BuildModel, CruseBottleneck) {
  const auto g = build_model(parse_model_name("CRUSE4-128-1xGRU4"));
  EXPECT_EQ(encoder_widths(g.spec()), (std::vector<std::size_t>{161, 81, 41, 21, 11}));
  bool found = false;
  for (const auto& layer : g.layers()) {
    if (const auto* p = std::get_if<cruse::nn::ParallelRnn<cruse::nn::Gru<double>>>(&layer.impl)) {
      EXPECT_EQ(p->width(), 1408u);
      EXPECT_EQ(p->groups(), 4u);
      for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p->group(i).width(), 352u);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(g.layers().back().spec.activation, cruse::nn::Activation::sigmoid);
}

TEST(BuildModel, Nsnet2Dims) {
  const auto g = build_model(parse_model_name("NSnet2-400"));
  std::vector<std::pair<std::size_t, std::size_t>> dims;
  for (const auto& l : g.layers()) dims.emplace_back(l.spec.in_dims, l.spec.out_dims);
  const std::vector<std::pair<std::size_t, std::size_t>> expect{
      {161, 400}, {400, 400}, {400, 400}, {400, 600}, {600, 600}, {600, 161}};
  EXPECT_EQ(dims, expect);
  EXPECT_EQ(g.layers()[1].spec.kind, cruse::nn::LayerKind::gru);
  EXPECT_EQ(g.layers()[2].spec.kind, cruse::nn::LayerKind::gru);
  // Per-layer parameter arithmetic.
  const std::size_t gru = 3 * (400 * 400 + 400 * 400 + 2 * 400);
  EXPECT_EQ(g.parameter_count(), 161 * 400 + 400 + 2 * gru + 400 * 600 + 600 + 600 * 600 + 600 + 600 * 161 + 161);
}

TEST(BuildModel, RejectsIndivisibleGroups) {
  EXPECT_THROW(build_model(parse_model_name("CRUSE4-128-1xGRU5")), cruse::ConfigError);
}

TEST(TestWeights, Deterministic) {
  const auto a = flat_weights(seeded("CRUSE2-16-1xGRU2", 7));
  const auto b = flat_weights(seeded("CRUSE2-16-1xGRU2", 7));
  const auto c = flat_weights(seeded("CRUSE2-16-1xGRU2", 8));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double w : a) {
    EXPECT_GT(w, -0.1);
    EXPECT_LT(w, 0.1);
  }
}

TEST(TestWeights, Seed42FirstValueMatchesScalarLcg) {
  // Written out longhand: one LCG step modulo 2^64, top 23 bits, centred bucket.
  const std::uint64_t a = 6364136223846793005ULL, c = 1442695040888963407ULL;
  const std::uint64_t state = 42ULL * a + c;
  const std::uint64_t top = state / (1ULL << 41);
  const float expect = static_cast<float>(-0.1 + 0.2 * ((static_cast<double>(top) + 0.5) / 8388608.0));
  const auto w = flat_weights(seeded("NSnet2-400", 42));
  EXPECT_EQ(w[0], static_cast<double>(expect));
  Lcg64 rng(42);
  EXPECT_EQ(rng.next(), state);
}

TEST(Bundle, RoundTripGivesIdenticalInference) {
  const auto g = seeded("CRUSE2-16-1xGRU2");
  const auto dir = testutil::scratch_dir("bundle");
  write_bundle(dir / "m.bin", save_weights(g));
  const auto h = load_weights(read_bundle(dir / "m.bin"));
  EXPECT_EQ(h.name(), g.name());
  EXPECT_EQ(flat_weights(h), flat_weights(g));
  const auto f = random_features(30, 3);
  EXPECT_EQ(g.infer_utterance(f), h.infer_utterance(f));
  EXPECT_NE(save_weights(g).manifest.find("reset_after"), std::string::npos);
}

TEST(Bundle, TruncatedBlobFails) {
  auto b = save_weights(seeded("CRUSE2-16-1xGRU2"));
  b.blob.resize(b.blob.size() - 4);
  EXPECT_THROW(load_weights(b), cruse::FormatError);

  const auto dir = testutil::scratch_dir("bundle_trunc");
  write_bundle(dir / "m.bin", save_weights(seeded("CRUSE2-16-1xGRU2")));
  std::filesystem::resize_file(dir / "m.bin", 20);
  EXPECT_THROW(load_weights(read_bundle(dir / "m.bin")), cruse::FormatError);
}

TEST(Bundle, CellMismatchFails) {
  auto b = save_weights(seeded("CRUSE2-16-1xGRU2"));
  const auto pos = b.manifest.find("1xGRU2");
  ASSERT_NE(pos, std::string::npos);
  b.manifest.replace(pos, 6, "1xLSTM2");
  EXPECT_THROW(load_weights(b), cruse::FormatError);
}

TEST(Bundle, UnknownKeyAndBadMagicFail) {
  auto b = save_weights(seeded("NSnet2-400"));
  b.manifest += "mystery 1\n";
  EXPECT_THROW(load_weights(b), cruse::FormatError);
  const auto dir = testutil::scratch_dir("bundle_magic");
  std::ofstream(dir / "x.bin") << "NOTABUNDLE-------------";
  EXPECT_THROW(read_bundle(dir / "x.bin"), cruse::FormatError);
}

TEST(Inference, ZeroWeightsGiveHalf) {
  for (const char* name : {"NSnet2-400", "CRUSE4-128-1xGRU4", "CRUSE3-64-1xLSTM2-concat"}) {
    const auto g = build_model(parse_model_name(name));
    auto s = g.initial_state();
    const auto gains = g.infer_frame(random_features(1, 1).row(0), s);
    ASSERT_EQ(gains.size(), 161u);
    for (double v : gains) EXPECT_EQ(v, 0.5) << name;
  }
}

TEST(Inference, RepeatedFrameConverges) {
  const auto g = seeded("CRUSE4-128-1xGRU4");
  const auto frame = random_features(1, 5);
  auto s = g.initial_state();
  std::vector<double> prev = g.infer_frame(frame.row(0), s);
  std::vector<double> diffs;
  for (int n = 0; n < 60; ++n) {
    const auto cur = g.infer_frame(frame.row(0), s);
    double d = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) d = std::max(d, std::abs(cur[k] - prev[k]));
    diffs.push_back(d);
    prev = cur;
  }
  for (std::size_t n = 20; n + 1 < diffs.size(); ++n) EXPECT_LE(diffs[n + 1], diffs[n] + 1e-15) << n;
  EXPECT_LT(diffs.back(), 1e-6);
}

TEST(Inference, GainsStrictlyInsideUnitInterval) {
  for (const char* name : {"NSnet2-400", "CRUSE4-128-1xGRU4"}) {
    const auto g = seeded(name, 99);
    auto f = random_features(20, 6);
    for (std::size_t i = 0; i < 161; ++i) f(3, i) = 1e6;  // extreme input
    const auto m = g.infer_utterance(f);
    for (double v : m.values()) {
      EXPECT_GT(v, 0.0);
      EXPECT_LT(v, 1.0);
    }
  }
}

TEST(Inference, UtteranceMatchesFrameLoop) {
  const auto g = seeded("CRUSE4-128-1xGRU4");
  const auto one = random_features(1, 7);
  auto s = g.initial_state();
  const auto single = g.infer_frame(one.row(0), s);
  const auto m1 = g.infer_utterance(one);
  EXPECT_TRUE(std::equal(single.begin(), single.end(), m1.row(0).begin()));

  const auto f = random_features(100, 8);
  const auto m = g.infer_utterance(f);
  auto st = g.initial_state();
  for (std::size_t n = 0; n < 100; ++n) {
    const auto y = g.infer_frame(f.row(n), st);
    EXPECT_TRUE(std::equal(y.begin(), y.end(), m.row(n).begin())) << n;
  }
  EXPECT_EQ(g.infer_utterance(FeatureSequence(0, 161)).frames(), 0u);
}

class BatchOracle : public ::testing::TestWithParam<const char*> {};

TEST_P(BatchOracle, StreamingMatchesWholeSequenceForward) {
  const auto g = seeded(GetParam(), 77);
  const auto f = random_features(40, 9);
  ref::Seq x;
  for (std::size_t n = 0; n < f.frames(); ++n) x.emplace_back(f.row(n).begin(), f.row(n).end());
  const auto expect = ref::forward(g, x);
  const auto m = g.infer_utterance(f);
  for (std::size_t n = 0; n < 40; ++n) {
    for (std::size_t k = 0; k < 161; ++k) ASSERT_NEAR(m(n, k), expect[n][k], 1e-9) << n << "," << k;
  }
}

INSTANTIATE_TEST_SUITE_P(Models, BatchOracle,
                         ::testing::Values("NSnet2-400", "CRUSE4-128-1xGRU4", "CRUSE4-128-1xGRU1-concat",
                                           "CRUSE3-64-2xLSTM2-addconv", "CRUSE4-64-1xGRU2-noskip-1D",
                                           "CRUSE5-256-1xGRU4"));

TEST(Inference, Causality) {
  const auto g = seeded("CRUSE4-128-1xGRU4", 5);
  auto f = random_features(30, 10);
  const auto base = g.infer_utterance(f);
  f(15, 40) += 3.0;
  const auto pert = g.infer_utterance(f);
  for (std::size_t n = 0; n < 15; ++n) {
    for (std::size_t k = 0; k < 161; ++k) EXPECT_EQ(base(n, k), pert(n, k));
  }
  double change = 0.0;
  for (std::size_t k = 0; k < 161; ++k) change += std::abs(base(15, k) - pert(15, k));
  EXPECT_GT(change, 0.0);
}

TEST(Inference, ShapeErrors) {
  const auto g = seeded("NSnet2-400");
  auto s = g.initial_state();
  EXPECT_THROW(g.infer_frame(std::vector<double>(160, 0.0), s), cruse::ShapeError);
  auto other = seeded("CRUSE2-16-1xGRU2").initial_state();
  EXPECT_THROW(g.infer_frame(std::vector<double>(161, 0.0), other), cruse::ShapeError);
}
