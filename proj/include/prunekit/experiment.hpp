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

#ifndef PRUNEKIT_EXPERIMENT_HPP
#define PRUNEKIT_EXPERIMENT_HPP

#include "prunekit/budget.hpp"
#include "prunekit/checkpoint.hpp"
#include "prunekit/data.hpp"
#include "prunekit/feature_mask.hpp"
#include "prunekit/models.hpp"
#include "prunekit/sparsity.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prunekit {

enum class Mode { Baseline, PruneWeights, PruneData, PruneBoth };
enum class DatasetName { Mnist, Cifar10, Cifar100 };
enum class OptimizerKind { Adam, Sgd };

std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);
std::string_view dataset_name(DatasetName d);
DatasetName parse_dataset(std::string_view name);
std::string_view optimizer_name(OptimizerKind o);
OptimizerKind parse_optimizer(std::string_view name);

struct ExperimentConfig {
  Mode mode = Mode::Baseline;
  DatasetName dataset = DatasetName::Mnist;
  Arch arch = Arch::Mlp;
  double sparsity = 0.5;
  // 0 picks the architecture default (20 for the MLP, 50 for SmallVGG).
  int epochs = 0;
  std::uint64_t seed = 0;
  SparsityCurve curve = SparsityCurve::Cubic;
  // PGM / feature-mask JSON / masks.json for prune_data; masks.json for prune_both.
  std::optional<std::filesystem::path> mask_source;
  std::filesystem::path output_dir = "runs/out";
  std::filesystem::path data_dir = "data";
  // 0 picks the architecture default (5 for the MLP, 3 for SmallVGG).
  int repeats = 0;
  Index batch_size = 128;
  double lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  // prune_both: start retraining from the surviving trained weights.
  bool inherit_weights = false;
  // Flip + crop. Unset means on for SmallVGG on CIFAR, off otherwise.
  std::optional<bool> augment;
  // Use only the first n training / test samples (0 = all).
  Index train_limit = 0;
  Index test_limit = 0;

  int resolved_epochs() const;
  int resolved_repeats() const;
  bool resolved_augment() const;
};

// Throws std::invalid_argument on out-of-range values.
void validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);
// Keys as in to_json; missing keys keep `base`'s values.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});

struct DataSplits {
  Dataset train;
  Dataset test;
};

// Loads the dataset in the layout the architecture consumes: flat 28x28
// grayscale for the MLP (CIFAR is converted and resized), (C, H, W) for
// SmallVGG.
DataSplits load_data(const ExperimentConfig& config);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  double weight_sparsity = 0.0;
  double lr = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpochMetrics> history;
  double final_accuracy = 0.0;
  Count params;
  Count flops;
  Checkpoint checkpoint;
  // Present when the network was trained with structure masks.
  std::optional<MaskSet> masks;
};

// Shrunk-before-retraining vs masked network on the test set.
struct AgreementCheck {
  Index samples = 0;
  Index mismatches = 0;
  double max_relative_diff = 0.0;
};

using FeatureMask = std::variant<std::monostate, PixelMask, ChannelMask>;

struct RunResult {
  ExperimentConfig config;
  std::vector<SeedResult> seeds;
  double mean_accuracy = 0.0;
  // Sample standard deviation (n - 1); 0 for one repeat.
  double std_accuracy = 0.0;
  // First repeat against the dense architecture on full inputs.
  BudgetReport budget;
  FeatureMask feature_mask;
  Index features_removed = 0;
  double data_sparsity = 0.0;
  // Test accuracy of the prune_weights run the masks came from, if any.
  std::optional<double> mask_run_accuracy;
  // Structure masks the feature mask or removal plan was derived from
  // (prune_data with an in-run mask pass, prune_both).
  std::optional<MaskSet> source_masks;
  std::optional<AgreementCheck> agreement;
};

double accuracy(const Network& net, const Dataset& data);
std::vector<std::int32_t> predictions(const Network& net, const Dataset& data);

struct TrainSettings {
  int epochs = 1;
  Index batch_size = 128;
  double lr = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  AugmentPolicy augment;
  // Zero disables pruning.
  double final_sparsity = 0.0;
  SparsityCurve curve = SparsityCurve::Cubic;
};

// One training run. With final_sparsity > 0 the network is pruned at every
// epoch end along the schedule and `masks` holds the result.
std::vector<EpochMetrics> train(Network& net, MaskSet& masks, const Dataset& train_set, const Dataset& test_set,
                                const TrainSettings& settings, std::mt19937_64& rng);

TrainSettings train_settings(const ExperimentConfig& config, double final_sparsity);

RunResult run(const ExperimentConfig& config);
RunResult run(const ExperimentConfig& config, const DataSplits& data);

// Writes results.csv, summary.json, masks/ and checkpoints/ under `dir`.
void emit_results(const RunResult& result, const std::filesystem::path& dir);
nlohmann::json summary_json(const RunResult& result);

nlohmann::json to_json(const MaskSet& masks);
MaskSet masks_from_json(const nlohmann::json& j);

struct SweepGrid {
  ExperimentConfig base;
  std::vector<double> weight_sparsities;
  std::vector<double> data_sparsities;
};

SweepGrid parse_grid(const nlohmann::json& j);

struct SweepCell {
  double weight_sparsity = 0.0;
  double data_sparsity = 0.0;
  RunResult result;
};

// Every (weight, data) pair: inputs are first pruned at the data sparsity
// (mask from a prune_weights run), then the network trains with weight
// pruning. (0, 0) is a plain baseline run.
std::vector<SweepCell> sweep(const SweepGrid& grid);
std::vector<SweepCell> sweep(const SweepGrid& grid, const DataSplits& data);

// Matrix of mean accuracies, data sparsity down, weight sparsity across.
std::string sweep_csv(const SweepGrid& grid, const std::vector<SweepCell>& cells);

}  // namespace prunekit

#endif  // PRUNEKIT_EXPERIMENT_HPP
