// Copyright 2026 The prunekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include "prunekit/experiment.hpp"
#include "prunekit/feature_trace.hpp"
#include "support/test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace prunekit;
using namespace prunekit::testing;
namespace fs = std::filesystem;

namespace {

// Ten noisy prototypes; learnable in an epoch or two.
Dataset prototypes(Index n, const Shape& sample, FeatureLayout layout, std::uint64_t seed) {
  std::mt19937_64 proto_rng(99);
  const Index f = shape_size(sample);
  const Tensor protos = random_tensor<float>({10, f}, proto_rng);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 0.3f);
  Shape shape{n};
  shape.insert(shape.end(), sample.begin(), sample.end());
  Dataset d{Tensor(shape), {}, 10, layout};
  for (Index i = 0; i < n; ++i) {
    const auto label = static_cast<std::int32_t>(rng() % 10);
    d.labels.push_back(label);
    for (Index k = 0; k < f; ++k) d.samples[i * f + k] = protos[label * f + k] + noise(rng);
  }
  return d;
}

DataSplits mlp_data() {
  const FeatureLayout layout{FeatureLayout::Kind::Flat, 1, 28, 28};
  return {prototypes(400, {784}, layout, 1), prototypes(200, {784}, layout, 2)};
}

DataSplits conv_data() {
  const FeatureLayout layout{FeatureLayout::Kind::Chw, 3, 8, 8};
  return {prototypes(96, {3, 8, 8}, layout, 3), prototypes(48, {3, 8, 8}, layout, 4)};
}

ExperimentConfig small_config(Mode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.epochs = 2;
  c.repeats = 2;
  c.seed = 7;
  c.batch_size = 32;
  c.lr = 3e-3;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "prunekit_experiment_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c = small_config(Mode::PruneBoth);
  c.dataset = DatasetName::Cifar10;
  c.arch = Arch::SmallVgg;
  c.sparsity = 0.3;
  c.curve = SparsityCurve::CosineRamp;
  c.optimizer = OptimizerKind::Sgd;
  c.inherit_weights = true;
  c.augment = false;
  c.train_limit = 50;
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.mode == Mode::PruneBoth);
  CHECK(back.augment == std::optional<bool>(false));

  CHECK_THROWS(config_from_json(nlohmann::json{{"sparsitty", 0.5}}));
  CHECK_THROWS(config_from_json(nlohmann::json{{"mode", "prune_everything"}}));

  ExperimentConfig bad = c;
  bad.sparsity = 1.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = c;
  bad.batch_size = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);

  CHECK(ExperimentConfig{}.resolved_epochs() == 20);
  CHECK(ExperimentConfig{}.resolved_repeats() == 5);
  ExperimentConfig vgg;
  vgg.arch = Arch::SmallVgg;
  vgg.dataset = DatasetName::Cifar10;
  CHECK(vgg.resolved_epochs() == 50);
  CHECK(vgg.resolved_repeats() == 3);
  CHECK(vgg.resolved_augment());
  CHECK_FALSE(ExperimentConfig{}.resolved_augment());
}

TEST_CASE("mask set json round trip") {
  std::mt19937_64 rng(3);
  Network net = random_small_network<float>(rng, 300);
  MaskSet masks = make_masks(net);
  apply_pruning(net, masks, 0.4);
  const MaskSet back = masks_from_json(nlohmann::json::parse(to_json(masks).dump()));
  CHECK(back == masks);
}

TEST_CASE("checkpoint reload reproduces predictions exactly") {
  const DataSplits data = mlp_data();
  ExperimentConfig c = small_config(Mode::PruneBoth);
  c.repeats = 1;
  const RunResult r = run(c, data);
  const fs::path dir = scratch("ckpt");
  save_checkpoint(r.seeds[0].checkpoint, dir / "a.pkck");
  const Checkpoint loaded = load_checkpoint(dir / "a.pkck");
  CHECK(loaded.kept_features == r.seeds[0].checkpoint.kept_features);
  CHECK(loaded.provenance == r.seeds[0].checkpoint.provenance);
  CHECK(loaded.original_input_shape == Shape{784});

  // the stored network consumes only the kept features
  PixelMask pm{28, 28, std::vector<bool>(784, false)};
  for (Index f : loaded.kept_features) pm.keep[static_cast<std::size_t>(f)] = true;
  const Dataset reduced = apply_feature_mask(data.test, pm);
  CHECK(accuracy(loaded.net, reduced) == r.seeds[0].final_accuracy);
  CHECK(predictions(loaded.net, reduced) == predictions(r.seeds[0].checkpoint.net, reduced));

  // byte-identical re-save
  save_checkpoint(loaded, dir / "b.pkck");
  CHECK(slurp(dir / "a.pkck") == slurp(dir / "b.pkck"));

  std::string bytes = slurp(dir / "a.pkck");
  std::ofstream(dir / "trailing.pkck", std::ios::binary) << bytes << 'x';
  CHECK_THROWS(load_checkpoint(dir / "trailing.pkck"));
  std::ofstream(dir / "short.pkck", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
  CHECK_THROWS(load_checkpoint(dir / "short.pkck"));
  bytes[0] = 'Q';
  std::ofstream(dir / "magic.pkck", std::ios::binary) << bytes;
  CHECK_THROWS(load_checkpoint(dir / "magic.pkck"));
}

TEST_CASE("runs are deterministic and outputs are path independent") {
  const DataSplits data = mlp_data();
  const ExperimentConfig c = small_config(Mode::PruneWeights);
  ExperimentConfig c2 = c;
  c2.output_dir = "elsewhere";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const RunResult ra = run(c, data), rb = run(c2, data);
  emit_results(ra, a);
  emit_results(rb, b);
  for (const char* f : {"summary.json", "results.csv", "masks/seed_7.json", "masks/seed_8.json",
                        "checkpoints/seed_7.pkck", "checkpoints/seed_8.pkck"}) {
    INFO(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const std::string csv = slurp(a / "results.csv");
  CHECK(csv.rfind("seed,epoch,train_loss,test_accuracy,weight_sparsity,lr\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2);

  REQUIRE(ra.seeds.size() == 2);
  CHECK(ra.seeds[0].seed == 7);
  CHECK(ra.seeds[1].seed == 8);
  const double m = (ra.seeds[0].final_accuracy + ra.seeds[1].final_accuracy) / 2;
  CHECK(ra.mean_accuracy == doctest::Approx(m));
  CHECK(ra.std_accuracy == doctest::Approx(std::abs(ra.seeds[0].final_accuracy - ra.seeds[1].final_accuracy) /
                                           std::sqrt(2.0)));
  CHECK(ra.mean_accuracy > 50.0);
  // the final epoch reaches the target structure sparsity
  CHECK(ra.seeds[0].history.back().weight_sparsity > 0.0);
}

TEST_CASE("summary budgets match the stored checkpoints") {
  const DataSplits data = mlp_data();
  for (Mode mode : {Mode::Baseline, Mode::PruneWeights, Mode::PruneData, Mode::PruneBoth}) {
    INFO(mode_name(mode));
    ExperimentConfig c = small_config(mode);
    c.repeats = 1;
    const RunResult r = run(c, data);
    const auto& s = r.seeds[0];
    CHECK(count_params(s.checkpoint.net) == s.params);
    CHECK(count_flops(s.checkpoint.net) == s.flops);
    CHECK(r.budget.params == s.params);
    CHECK(r.budget.baseline_params.total == 104690);
    CHECK(r.budget.baseline_params.nonzero == 104690);
    CHECK(r.budget.baseline_flops.total == 104480);
    if (mode == Mode::Baseline) CHECK(r.budget.params_reduction < 1.0);
    if (mode == Mode::PruneWeights) CHECK(r.budget.params_reduction == doctest::Approx(49.90).epsilon(0.002));
    if (mode == Mode::PruneData) {
      CHECK(r.features_removed == 392);
      CHECK(r.mask_run_accuracy.has_value());
      CHECK(std::holds_alternative<PixelMask>(r.feature_mask));
      CHECK(s.checkpoint.kept_features.size() == 392);
    }
    CHECK(r.source_masks.has_value() == (mode == Mode::PruneData || mode == Mode::PruneBoth));
    if (mode == Mode::PruneBoth) {
      REQUIRE(r.agreement.has_value());
      CHECK(r.agreement->mismatches == 0);
      CHECK(r.agreement->samples == data.test.size());
      CHECK(s.params.total == 26430);
      CHECK(r.budget.params_reduction == doctest::Approx(74.754).epsilon(1e-3));
    }
  }
}

TEST_CASE("conv prune_data uses a quantized channel mask") {
  const DataSplits data = conv_data();
  ExperimentConfig c = small_config(Mode::PruneData);
  c.arch = Arch::SmallVgg;
  c.dataset = DatasetName::Cifar10;
  c.repeats = 1;
  c.epochs = 1;
  c.sparsity = 0.5;
  const RunResult r = run(c, data);
  REQUIRE(std::holds_alternative<ChannelMask>(r.feature_mask));
  CHECK(std::get<ChannelMask>(r.feature_mask).kept_channels.size() == 2);
  CHECK(r.data_sparsity == doctest::Approx(1.0 / 3.0));
  CHECK(r.seeds[0].checkpoint.net.input_shape == Shape{2, 8, 8});
}

TEST_CASE("sweep cells") {
  const DataSplits data = mlp_data();
  SweepGrid g;
  g.base = small_config(Mode::Baseline);
  g.base.repeats = 1;
  g.weight_sparsities = {0.0, 0.5};
  g.data_sparsities = {0.0, 0.25};
  const auto cells = sweep(g, data);
  REQUIRE(cells.size() == 4);
  ExperimentConfig base = g.base;
  const RunResult plain = run(base, data);
  CHECK(cells[0].weight_sparsity == 0.0);
  CHECK(cells[0].data_sparsity == 0.0);
  CHECK(cells[0].result.mean_accuracy == plain.mean_accuracy);
  for (const auto& cell : cells) {
    // weight-only cells report the inputs their pruned first layer ignores
    if (cell.data_sparsity > 0.0) CHECK(cell.result.features_removed == llround(cell.data_sparsity * 784));
    if (cell.data_sparsity == 0.0 && cell.weight_sparsity == 0.0) CHECK(cell.result.features_removed == 0);
  }
  const std::string csv = sweep_csv(g, cells);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const SweepGrid parsed = parse_grid(nlohmann::json::parse(
      R"({"base": {"epochs": 1}, "weight_sparsity": [0, 0.5, 0.9], "data_sparsity": [0.25]})"));
  CHECK(parsed.base.epochs == 1);
  CHECK(parsed.weight_sparsities.size() == 3);
  CHECK(parsed.data_sparsities == std::vector<double>{0.25});
}

TEST_CASE("command line smoke test") {
  const fs::path dir = scratch("cli");
  const DataSplits data = mlp_data();
  ExperimentConfig c = small_config(Mode::PruneBoth);
  c.repeats = 1;
  emit_results(run(c, data), dir);
  const std::string cli = PRUNEKIT_CLI;
  const std::string ckpt = (dir / "checkpoints" / "seed_7.pkck").string();
  const std::string cmd = cli + " budget --json --checkpoint " + ckpt + " > " + (dir / "budget.json").string();
  REQUIRE(std::system(cmd.c_str()) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "budget.json"));
  CHECK(j.at("params").at("total") == 26430);
  // the source masks reproduce the same run when fed back in
  c.mask_source = dir / "masks" / "source_masks.json";
  CHECK(run(c, data).seeds[0].final_accuracy == nlohmann::json::parse(slurp(dir / "summary.json"))["seeds"][0]["final_accuracy"].get<double>());
  CHECK(std::system((cli + " run --mode nonsense > /dev/null 2>&1").c_str()) != 0);
  CHECK(std::system((cli + " budget --checkpoint " + (dir / "summary.json").string() + " > /dev/null 2>&1").c_str()) !=
        0);
}
