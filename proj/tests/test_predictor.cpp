#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "twinsync/dsp.hpp"
#include "twinsync/predictor.hpp"
#include "twinsync/signal.hpp"

using namespace twinsync;

namespace {

Trajectory constant_trajectory(std::int64_t n, double value) {
  Trajectory t;
  t.samples.assign(static_cast<std::size_t>(n), value);
  return t;
}

// Single identity layer that copies the last history sample to every horizon.
PredictorModel hold_last_predictor(int l_in, int h_max, double mean = 0.0, double scale = 1.0) {
  PredictorModel m;
  m.l_in = l_in;
  m.h_max = h_max;
  m.mean = mean;
  m.scale = scale;
  Layer l;
  l.in = l_in;
  l.out = h_max;
  l.w.assign(static_cast<std::size_t>(l_in) * h_max, 0.0);
  for (int o = 0; o < h_max; ++o)
    l.w[static_cast<std::size_t>(o) * l_in + (l_in - 1)] = 1.0;
  l.b.assign(static_cast<std::size_t>(h_max), 0.0);
  l.act = {Act::Identity};
  m.net.layers.push_back(l);
  return m;
}

}  // namespace

TEST_CASE("build_dataset window counts") {
  SynthSpec spec = default_synth_spec(3);
  spec.duration_slots = 30;
  const Trajectory t = synthesize_trace(spec);
  SECTION("length 30, l_in 10, h_max 10 gives 11 rows") {
    const WindowDataset ds = build_dataset(t, 10, 10);
    REQUIRE(ds.rows == 11);
    // Row r is the contiguous slice starting at slot r.
    for (int i = 0; i < 10; ++i) {
      REQUIRE(ds.history_row(4)[static_cast<std::size_t>(i)] == t.samples[4 + i]);
      REQUIRE(ds.future_row(4)[static_cast<std::size_t>(i)] == t.samples[14 + i]);
    }
  }
  SECTION("exact-length trajectory gives one row") {
    const WindowDataset ds = build_dataset(t, 20, 10);
    REQUIRE(ds.rows == 1);
  }
  SECTION("too-short trajectory is an error") {
    REQUIRE_THROWS_AS(build_dataset(t, 20, 11), std::invalid_argument);
  }
}

TEST_CASE("build_dataset floors the scale to 1 for constant input") {
  const WindowDataset ds = build_dataset(constant_trajectory(40, 5.5), 8, 4);
  REQUIRE(ds.mean == Catch::Approx(5.5));
  REQUIRE(ds.scale == 1.0);
}

TEST_CASE("train_predictor learns a constant signal") {
  const double c = 2.0;
  const WindowDataset ds = build_dataset(constant_trajectory(60, c), 8, 4);
  PredictorTrainConfig cfg;
  cfg.epochs = 80;
  cfg.batch = 16;
  cfg.hidden = {16};
  cfg.seed = 11;
  const PredictorTrainResult res = train_predictor(ds, cfg);
  std::vector<double> history(8, c);
  const auto pred = predict(res.model, history, 4);
  for (double v : pred) REQUIRE(std::abs(v - c) <= std::abs(c) * 1e-2);
}

TEST_CASE("train_predictor sinusoid regression bound") {
  // 1 Hz sinusoid, l_in = 200, h_max = 200: horizon-wide MSE <= 1e-3 deg^2
  // after 50 epochs (seeded regression bound).
  SynthSpec spec;
  spec.components = {{1.0, 1.0, 0.0}};
  spec.duration_slots = 2500;
  spec.seed = 0;
  const Trajectory t = synthesize_trace(spec);
  const WindowDataset ds = build_dataset(t, 200, 200);
  PredictorTrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch = 64;
  cfg.hidden = {64, 64};
  cfg.seed = 7;
  const PredictorTrainResult res = train_predictor(ds, cfg);
  REQUIRE(res.final_loss <= 1e-3);
}

TEST_CASE("train_predictor with zero epochs returns the initialization") {
  SynthSpec spec = default_synth_spec(9);
  spec.duration_slots = 200;
  const Trajectory t = synthesize_trace(spec);
  const WindowDataset ds = build_dataset(t, 16, 8);
  PredictorTrainConfig cfg;
  cfg.epochs = 0;
  cfg.hidden = {8};
  cfg.seed = 21;
  const PredictorTrainResult res = train_predictor(ds, cfg);
  Rng init = make_stream(21, "predictor-init");
  const DenseNet expected = make_mlp(16, {8}, 8, Act::Relu, Act::Identity, init);
  for (std::size_t i = 0; i < expected.layers.size(); ++i) {
    REQUIRE(res.model.net.layers[i].w == expected.layers[i].w);
    REQUIRE(res.model.net.layers[i].b == expected.layers[i].b);
  }
  REQUIRE(res.epoch_loss.empty());
  REQUIRE(res.final_loss > 0.0);
}

TEST_CASE("train_predictor is deterministic per seed") {
  SynthSpec spec = default_synth_spec(4);
  spec.duration_slots = 300;
  const Trajectory t = synthesize_trace(spec);
  const WindowDataset ds = build_dataset(t, 20, 10);
  PredictorTrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = {12};
  cfg.seed = 5;
  const PredictorTrainResult a = train_predictor(ds, cfg);
  const PredictorTrainResult b = train_predictor(ds, cfg);
  for (std::size_t i = 0; i < a.model.net.layers.size(); ++i)
    REQUIRE(a.model.net.layers[i].w == b.model.net.layers[i].w);
  REQUIRE(a.epoch_loss == b.epoch_loss);
}

TEST_CASE("predict de-normalizes a zero net to the dataset mean") {
  PredictorModel m;
  m.l_in = 6;
  m.h_max = 4;
  m.mean = 3.25;
  m.scale = 2.0;
  Layer l;
  l.in = 6;
  l.out = 4;
  l.w.assign(24, 0.0);
  l.b.assign(4, 0.0);
  l.act = {Act::Identity};
  m.net.layers.push_back(l);
  std::vector<double> history{1, 2, 3, 4, 5, 6};
  for (int h = 1; h <= 4; ++h) {
    const auto out = predict(m, history, h);
    REQUIRE(out.size() == static_cast<std::size_t>(h));
    for (double v : out) REQUIRE(v == Catch::Approx(3.25));
  }
}

TEST_CASE("predict truncates to a prefix") {
  SynthSpec spec = default_synth_spec(13);
  spec.duration_slots = 300;
  const Trajectory t = synthesize_trace(spec);
  const WindowDataset ds = build_dataset(t, 20, 12);
  PredictorTrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden = {10};
  cfg.seed = 3;
  const PredictorModel m = train_predictor(ds, cfg).model;
  std::vector<double> history(t.samples.begin(), t.samples.begin() + 20);
  const auto full = predict(m, history, 12);
  const auto part = predict(m, history, 5);
  for (std::size_t i = 0; i < part.size(); ++i) REQUIRE(part[i] == full[i]);
  REQUIRE_THROWS_AS(predict(m, history, 13), std::invalid_argument);
}

TEST_CASE("hand-built copy-last net holds the final history sample") {
  const PredictorModel m = hold_last_predictor(5, 6, /*mean=*/1.5, /*scale=*/4.0);
  std::vector<double> history{0.0, 0.25, -1.0, 2.0, 7.5};
  const auto out = predict(m, history, 6);
  for (double v : out) REQUIRE(v == Catch::Approx(7.5));
}

TEST_CASE("full-rate reconstruction feeds the predictor unchanged") {
  SynthSpec spec = default_synth_spec(17);
  spec.duration_slots = 100;
  const Trajectory t = synthesize_trace(spec);
  Segment seg{std::vector<double>(t.samples.begin(), t.samples.begin() + 30), 0};
  const Segment recon = reconstruct(sample_segment(seg, 30));
  REQUIRE(recon.values == seg.values);
  const PredictorModel m = hold_last_predictor(30, 10);
  REQUIRE(predict(m, seg.values, 10) == predict(m, recon.values, 10));
}
