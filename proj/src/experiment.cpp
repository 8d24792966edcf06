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

#include "prunekit/experiment.hpp"

#include "prunekit/feature_trace.hpp"
#include "prunekit/schedule.hpp"
#include "prunekit/surgery.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace prunekit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::array<std::pair<std::string_view, E>, N>& table, const char* what) {
  for (const auto& [n, e] : table) {
    if (n == name) return e;
  }
  std::string valid;
  for (const auto& [n, _] : table) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw std::invalid_argument("unknown " + std::string(what) + " '" + std::string(name) + "' (expected " + valid + ")");
}

template <typename E, std::size_t N>
std::string_view enum_name(E e, const std::array<std::pair<std::string_view, E>, N>& table) {
  for (const auto& [n, v] : table) {
    if (v == e) return n;
  }
  return "?";
}

constexpr std::array<std::pair<std::string_view, Mode>, 4> kModes{{{"baseline", Mode::Baseline},
                                                                   {"prune_weights", Mode::PruneWeights},
                                                                   {"prune_data", Mode::PruneData},
                                                                   {"prune_both", Mode::PruneBoth}}};
constexpr std::array<std::pair<std::string_view, DatasetName>, 3> kDatasets{
    {{"mnist", DatasetName::Mnist}, {"cifar10", DatasetName::Cifar10}, {"cifar100", DatasetName::Cifar100}}};
constexpr std::array<std::pair<std::string_view, OptimizerKind>, 2> kOptimizers{
    {{"adam", OptimizerKind::Adam}, {"sgd", OptimizerKind::Sgd}}};

constexpr Index kEvalChunk = 500;

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind) {
  if (kind == OptimizerKind::Sgd) return std::make_unique<Sgd>(0.9, 5e-4);
  return std::make_unique<Adam>(Adam::Options{});
}

// Contiguous sample rows [start, start + count).
Tensor rows(const Dataset& data, Index start, Index count) {
  const Index f = data.features();
  Shape shape = data.samples.shape();
  shape[0] = count;
  return Tensor(std::move(shape), data.samples.vec().segment(start * f, count * f));
}

Dataset to_chw(Dataset d) {
  const Index h = d.layout.height, w = d.layout.width;
  d.samples = d.samples.reshaped({d.size(), 1, h, w});
  d.layout = {FeatureLayout::Kind::Chw, 1, h, w};
  return d;
}

Dataset limit(const Dataset& d, Index n) { return n > 0 && n < d.size() ? head(d, n) : d; }

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

bool flat_input(const Network& net) { return net.input_shape.size() == 1; }

// Feature mask induced by first-layer pruning. Channel masks for data pruning
// are quantized; for surgery they follow the plan exactly.
FeatureMask derive_feature_mask(const Network& dense, const MaskSet& masks, const Dataset& data, double sparsity,
                                bool quantize_channels) {
  if (flat_input(dense)) {
    return pixel_mask_from_plan(build_plan(dense, masks), data.layout.height, data.layout.width);
  }
  const Index channels = dense.input_shape[0];
  if (quantize_channels) {
    const auto first = std::min_element(masks.begin(), masks.end(), [](const auto& a, const auto& b) {
      return a.layer_index < b.layer_index;
    });
    if (first == masks.end()) throw std::invalid_argument("mask set is empty");
    return quantized_channel_mask(*first, sparsity, channels);
  }
  return channel_mask_from_plan(build_plan(dense, masks), channels);
}

Dataset apply_mask(const Dataset& d, const FeatureMask& m) {
  if (const auto* p = std::get_if<PixelMask>(&m)) return apply_feature_mask(d, *p);
  if (const auto* c = std::get_if<ChannelMask>(&m)) return apply_feature_mask(d, *c);
  return d;
}

std::vector<Index> kept_features(const FeatureMask& m) {
  std::vector<Index> kept;
  if (const auto* p = std::get_if<PixelMask>(&m)) {
    for (std::size_t i = 0; i < p->keep.size(); ++i) {
      if (p->keep[i]) kept.push_back(static_cast<Index>(i));
    }
  } else if (const auto* c = std::get_if<ChannelMask>(&m)) {
    kept = c->kept_channels;
  }
  return kept;
}

Index removed_features(const FeatureMask& m) {
  if (const auto* p = std::get_if<PixelMask>(&m)) return p->removed_count();
  if (const auto* c = std::get_if<ChannelMask>(&m)) return c->channels - static_cast<Index>(c->kept_channels.size());
  return 0;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

struct MaskRun {
  Network net;
  MaskSet masks;
  double accuracy = 0.0;
};

// The prune_weights run that data and surgery masks are derived from. Pinned
// to the first seed so every repeat retrains against the same mask.
MaskRun mask_run(const ExperimentConfig& cfg, const DataSplits& data, const Network& dense, double sparsity) {
  MaskRun r{dense, {}, 0.0};
  std::mt19937_64 rng(cfg.seed);
  initialize(r.net, rng);
  const auto history = train(r.net, r.masks, data.train, data.test, train_settings(cfg, sparsity), rng);
  if (r.masks.empty()) r.masks = make_masks(r.net);
  r.accuracy = history.empty() ? accuracy(r.net, data.test) : history.back().test_accuracy;
  return r;
}

SeedResult train_seed(const ExperimentConfig& cfg, std::uint64_t seed, Network net, bool fresh_init,
                      const Dataset& train_set, const Dataset& test_set, double final_sparsity) {
  SeedResult r;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  if (fresh_init) initialize(net, rng);
  MaskSet masks;
  r.history = train(net, masks, train_set, test_set, train_settings(cfg, final_sparsity), rng);
  r.final_accuracy = r.history.empty() ? accuracy(net, test_set) : r.history.back().test_accuracy;
  r.params = count_params(net);
  r.flops = count_flops(net);
  if (!masks.empty()) r.masks = std::move(masks);
  r.checkpoint.net = std::move(net);
  return r;
}

void finish(RunResult& result, const Network& dense) {
  std::vector<double> acc;
  for (const auto& s : result.seeds) acc.push_back(s.final_accuracy);
  result.mean_accuracy = mean(acc);
  result.std_accuracy = sample_std(acc);
  const Count p = count_params(dense), f = count_flops(dense);
  const auto& first = result.seeds.front();
  result.budget = budget_report(Count{p.total, p.total}, Count{f.total, f.total}, first.params, first.flops);
  result.features_removed = removed_features(result.feature_mask);
  const Index total_features = flat_input(dense) ? shape_size(dense.input_shape) : dense.input_shape[0];
  result.data_sparsity = static_cast<double>(result.features_removed) / static_cast<double>(total_features);
}

// Feature mask for prune_data: from a file, or from an in-run prune_weights pass.
FeatureMask data_mask(const ExperimentConfig& cfg, const DataSplits& data, const Network& dense, double sparsity,
                      std::optional<double>& mask_accuracy, std::optional<MaskSet>& source_masks) {
  if (!cfg.mask_source) {
    const MaskRun m = mask_run(cfg, data, dense, sparsity);
    mask_accuracy = m.accuracy;
    source_masks = m.masks;
    return derive_feature_mask(dense, m.masks, data.train, sparsity, true);
  }
  const fs::path& src = *cfg.mask_source;
  if (!fs::exists(src)) throw std::runtime_error("mask source not found: " + src.string());
  FeatureMask mask;
  if (src.extension() == ".pgm") {
    mask = read_pgm_mask(src);
  } else {
    const json j = read_json(src);
    if (j.contains("masks")) {
      const MaskSet masks = masks_from_json(j);
      validate_masks(dense, masks);
      mask = derive_feature_mask(dense, masks, data.train, sparsity, true);
    } else if (j.value("kind", "") == "pixel") {
      mask = pixel_mask_from_json(j);
    } else if (j.value("kind", "") == "channel") {
      mask = channel_mask_from_json(j);
    } else {
      throw std::invalid_argument(src.string() + ": not a mask file");
    }
  }
  if (std::holds_alternative<PixelMask>(mask) != flat_input(dense)) {
    throw std::invalid_argument(src.string() + ": mask kind does not match the architecture's input");
  }
  return mask;
}

RunResult run_prune_data(const ExperimentConfig& cfg, const DataSplits& data, const Network& dense,
                         const FeatureMask& mask, double weight_sparsity) {
  RunResult result;
  result.config = cfg;
  result.feature_mask = mask;
  const Dataset train_set = apply_mask(data.train, mask), test_set = apply_mask(data.test, mask);
  const Network net = make_model(cfg.arch, train_set.sample_shape(), data.train.num_classes);
  const FeatureKind kind = flat_input(dense) ? FeatureKind::Flat : FeatureKind::Channel;
  for (int r = 0; r < cfg.resolved_repeats(); ++r) {
    auto s = train_seed(cfg, cfg.seed + r, net, true, train_set, test_set, weight_sparsity);
    s.checkpoint = make_checkpoint(s.checkpoint.net, dense.input_shape, kind, kept_features(mask));
    result.seeds.push_back(std::move(s));
  }
  finish(result, dense);
  return result;
}

AgreementCheck agreement(const Network& masked, const Network& shrunk, const Dataset& full, const Dataset& pruned) {
  AgreementCheck c;
  c.samples = full.size();
  for (Index start = 0; start < full.size(); start += kEvalChunk) {
    const Index n = std::min(kEvalChunk, full.size() - start);
    const Tensor a = forward(masked, rows(full, start, n));
    const Tensor b = forward(shrunk, rows(pruned, start, n));
    const auto am = a.matrix(), bm = b.matrix();
    for (Index i = 0; i < n; ++i) {
      Index ia = 0, ib = 0;
      am.row(i).maxCoeff(&ia);
      bm.row(i).maxCoeff(&ib);
      if (ia != ib) ++c.mismatches;
      const double denom = std::max<double>(am.row(i).cwiseAbs().maxCoeff(), 1e-30);
      c.max_relative_diff = std::max(c.max_relative_diff, (am.row(i) - bm.row(i)).cwiseAbs().maxCoeff() / denom);
    }
  }
  return c;
}

RunResult run_prune_both(const ExperimentConfig& cfg, const DataSplits& data, const Network& dense) {
  RunResult result;
  result.config = cfg;
  std::optional<MaskRun> source;
  MaskSet masks;
  if (cfg.mask_source) {
    if (!fs::exists(*cfg.mask_source)) throw std::runtime_error("mask source not found: " + cfg.mask_source->string());
    masks = masks_from_json(read_json(*cfg.mask_source));
    validate_masks(dense, masks);
  } else {
    source = mask_run(cfg, data, dense, cfg.sparsity);
    result.mask_run_accuracy = source->accuracy;
    masks = source->masks;
  }
  const RemovalPlan plan = build_plan(dense, masks);
  result.source_masks = masks;
  ShrunkNetwork shrunk;
  try {
    shrunk = shrink(source ? source->net : dense, plan);
  } catch (const std::runtime_error& e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", cfg.sparsity);
    throw std::runtime_error(std::string(e.what()) + " at sparsity " + buf);
  }
  result.feature_mask = flat_input(dense) ? FeatureMask(pixel_mask_from_plan(plan, data.train.layout.height,
                                                                             data.train.layout.width))
                                          : FeatureMask(channel_mask_from_plan(plan, dense.input_shape[0]));
  const Dataset train_set = apply_mask(data.train, result.feature_mask);
  const Dataset test_set = apply_mask(data.test, result.feature_mask);
  if (source) result.agreement = agreement(source->net, shrunk.net, data.test, test_set);

  const bool fresh = !(cfg.inherit_weights && source);
  for (int r = 0; r < cfg.resolved_repeats(); ++r) {
    auto s = train_seed(cfg, cfg.seed + r, shrunk.net, fresh, train_set, test_set, 0.0);
    ShrunkNetwork trained = shrunk;
    trained.net = std::move(s.checkpoint.net);
    s.checkpoint = make_checkpoint(trained);
    result.seeds.push_back(std::move(s));
  }
  finish(result, dense);
  return result;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string_view mode_name(Mode m) { return enum_name(m, kModes); }
Mode parse_mode(std::string_view name) { return parse_enum(name, kModes, "mode"); }
std::string_view dataset_name(DatasetName d) { return enum_name(d, kDatasets); }
DatasetName parse_dataset(std::string_view name) { return parse_enum(name, kDatasets, "dataset"); }
std::string_view optimizer_name(OptimizerKind o) { return enum_name(o, kOptimizers); }
OptimizerKind parse_optimizer(std::string_view name) { return parse_enum(name, kOptimizers, "optimizer"); }

int ExperimentConfig::resolved_epochs() const {
  if (epochs > 0) return epochs;
  return arch == Arch::Mlp ? 20 : 50;
}

int ExperimentConfig::resolved_repeats() const {
  if (repeats > 0) return repeats;
  return arch == Arch::Mlp ? 5 : 3;
}

bool ExperimentConfig::resolved_augment() const {
  if (augment) return *augment;
  return arch == Arch::SmallVgg && dataset != DatasetName::Mnist;
}

void validate(const ExperimentConfig& c) {
  if (!(c.sparsity >= 0.0 && c.sparsity < 1.0)) throw std::invalid_argument("sparsity must lie in [0, 1)");
  if (c.epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (c.repeats < 0) throw std::invalid_argument("repeats must be non-negative");
  if (c.batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(c.lr > 0.0) || !std::isfinite(c.lr)) throw std::invalid_argument("learning rate must be positive");
  if (c.train_limit < 0 || c.test_limit < 0) throw std::invalid_argument("sample limits must be non-negative");
  if (c.mask_source && (c.mode == Mode::Baseline || c.mode == Mode::PruneWeights)) {
    throw std::invalid_argument("a mask source only applies to prune_data and prune_both");
  }
}

json to_json(const ExperimentConfig& c) {
  json j{{"mode", mode_name(c.mode)},
         {"dataset", dataset_name(c.dataset)},
         {"arch", arch_name(c.arch)},
         {"sparsity", c.sparsity},
         {"epochs", c.resolved_epochs()},
         {"seed", c.seed},
         {"curve", curve_name(c.curve)},
         {"repeats", c.resolved_repeats()},
         {"batch_size", c.batch_size},
         {"lr", c.lr},
         {"optimizer", optimizer_name(c.optimizer)},
         {"inherit_weights", c.inherit_weights},
         {"augment", c.resolved_augment()},
         {"train_limit", c.train_limit},
         {"test_limit", c.test_limit}};
  j["mask_source"] = c.mask_source ? json(c.mask_source->filename().string()) : json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "mode") c.mode = parse_mode(v.get<std::string>());
    else if (key == "dataset") c.dataset = parse_dataset(v.get<std::string>());
    else if (key == "arch") c.arch = parse_arch(v.get<std::string>());
    else if (key == "sparsity") c.sparsity = v.get<double>();
    else if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "curve") c.curve = parse_curve(v.get<std::string>());
    else if (key == "mask_source") c.mask_source = v.is_null() ? std::nullopt : std::optional<fs::path>(v.get<std::string>());
    else if (key == "output_dir") c.output_dir = v.get<std::string>();
    else if (key == "data_dir") c.data_dir = v.get<std::string>();
    else if (key == "repeats") c.repeats = v.get<int>();
    else if (key == "batch_size") c.batch_size = v.get<Index>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "optimizer") c.optimizer = parse_optimizer(v.get<std::string>());
    else if (key == "inherit_weights") c.inherit_weights = v.get<bool>();
    else if (key == "augment") c.augment = v.is_null() ? std::nullopt : std::optional<bool>(v.get<bool>());
    else if (key == "train_limit") c.train_limit = v.get<Index>();
    else if (key == "test_limit") c.test_limit = v.get<Index>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return c;
}

DataSplits load_data(const ExperimentConfig& cfg) {
  DataSplits d;
  if (cfg.dataset == DatasetName::Mnist) {
    const fs::path dir = cfg.data_dir / "mnist";
    d.train = load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    d.test = load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    if (cfg.arch == Arch::SmallVgg) {
      d.train = to_chw(std::move(d.train));
      d.test = to_chw(std::move(d.test));
    }
  } else {
    std::vector<fs::path> train_files, test_files;
    CifarVariant variant = CifarVariant::Cifar10;
    if (cfg.dataset == DatasetName::Cifar10) {
      const fs::path dir = cfg.data_dir / "cifar-10-batches-bin";
      for (int i = 1; i <= 5; ++i) train_files.push_back(dir / ("data_batch_" + std::to_string(i) + ".bin"));
      test_files.push_back(dir / "test_batch.bin");
    } else {
      const fs::path dir = cfg.data_dir / "cifar-100-binary";
      train_files.push_back(dir / "train.bin");
      test_files.push_back(dir / "test.bin");
      variant = CifarVariant::Cifar100;
    }
    d.train = load_cifar_binary(train_files, variant);
    d.test = load_cifar_binary(test_files, variant);
    if (cfg.arch == Arch::Mlp) {
      d.train = resize_bilinear(to_grayscale(d.train), 28, 28);
      d.test = resize_bilinear(to_grayscale(d.test), 28, 28);
    }
  }
  d.train = limit(d.train, cfg.train_limit);
  d.test = limit(d.test, cfg.test_limit);
  return d;
}

std::vector<std::int32_t> predictions(const Network& net, const Dataset& data) {
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (Index start = 0; start < data.size(); start += kEvalChunk) {
    const Index n = std::min(kEvalChunk, data.size() - start);
    const auto p = argmax_rows(forward(net, rows(data, start, n)));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("cannot evaluate on an empty dataset");
  const auto p = predictions(net, data);
  Index correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i) correct += p[i] == data.labels[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainSettings train_settings(const ExperimentConfig& cfg, double final_sparsity) {
  TrainSettings s;
  s.epochs = cfg.resolved_epochs();
  s.batch_size = cfg.batch_size;
  s.lr = cfg.lr;
  s.optimizer = cfg.optimizer;
  s.augment.enabled = cfg.resolved_augment();
  s.final_sparsity = final_sparsity;
  s.curve = cfg.curve;
  return s;
}

std::vector<EpochMetrics> train(Network& net, MaskSet& masks, const Dataset& train_set, const Dataset& test_set,
                                const TrainSettings& settings, std::mt19937_64& rng) {
  const Index n = train_set.size();
  if (n == 0) throw std::invalid_argument("empty training set");
  const Index steps_per_epoch = (n + settings.batch_size - 1) / settings.batch_size;
  const LrSchedule lr_schedule{settings.lr, 0.25, std::max<std::int64_t>(1, settings.epochs * steps_per_epoch)};
  const bool pruning = settings.final_sparsity > 0.0;
  const SparsitySchedule schedule{settings.final_sparsity, std::max(1, settings.epochs), 0.5, settings.curve};
  if (pruning && masks.empty()) masks = make_masks(net);

  auto opt = make_optimizer(settings.optimizer);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::vector<EpochMetrics> history;
  std::int64_t step = 0;
  double lr = 0.0;
  for (int epoch = 0; epoch < settings.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (Index start = 0; start < n; start += settings.batch_size) {
      const Index count = std::min(settings.batch_size, n - start);
      Batch batch = gather(train_set, std::span<const Index>(order).subspan(start, count));
      if (settings.augment.enabled) batch.inputs = augment(batch.inputs, settings.augment, rng);
      lr = lr_at(lr_schedule, step);
      auto [loss, grads] = backward(net, batch.inputs, batch.labels);
      if (pruning) mask_gradients(grads, net, masks);
      opt->step(net, grads, lr);
      if (pruning) enforce_masks(net, masks);
      loss_sum += static_cast<double>(loss) * static_cast<double>(count);
      ++step;
    }
    EpochMetrics m;
    m.epoch = epoch + 1;
    m.train_loss = loss_sum / static_cast<double>(n);
    m.lr = lr;
    if (pruning) {
      m.weight_sparsity = sparsity_at(schedule, epoch + 1);
      apply_pruning(net, masks, m.weight_sparsity);
    }
    m.test_accuracy = accuracy(net, test_set);
    history.push_back(m);
  }
  return history;
}

RunResult run(const ExperimentConfig& cfg) { return run(cfg, load_data(cfg)); }

RunResult run(const ExperimentConfig& cfg, const DataSplits& data) {
  validate(cfg);
  const Network dense = make_model(cfg.arch, data.train.sample_shape(), data.train.num_classes);
  switch (cfg.mode) {
    case Mode::Baseline:
    case Mode::PruneWeights: {
      RunResult result;
      result.config = cfg;
      const double s = cfg.mode == Mode::PruneWeights ? cfg.sparsity : 0.0;
      for (int r = 0; r < cfg.resolved_repeats(); ++r) {
        auto seed = train_seed(cfg, cfg.seed + r, dense, true, data.train, data.test, s);
        seed.checkpoint = make_checkpoint(seed.checkpoint.net);
        result.seeds.push_back(std::move(seed));
      }
      const auto& first = result.seeds.front();
      if (first.masks) {
        // Channel view follows the plan; pixel view is the same either way.
        result.feature_mask = derive_feature_mask(dense, *first.masks, data.train, s, false);
      }
      finish(result, dense);
      return result;
    }
    case Mode::PruneData: {
      std::optional<double> mask_accuracy;
      std::optional<MaskSet> source_masks;
      const FeatureMask mask = data_mask(cfg, data, dense, cfg.sparsity, mask_accuracy, source_masks);
      RunResult result = run_prune_data(cfg, data, dense, mask, 0.0);
      result.mask_run_accuracy = mask_accuracy;
      result.source_masks = std::move(source_masks);
      return result;
    }
    case Mode::PruneBoth:
      return run_prune_both(cfg, data, dense);
  }
  throw std::logic_error("unhandled mode");
}

json to_json(const MaskSet& masks) {
  json arr = json::array();
  for (const auto& m : masks) {
    arr.push_back({{"layer_index", m.layer_index},
                   {"granularity", granularity_name(m.granularity)},
                   {"size", m.size()},
                   {"pruned", m.pruned()},
                   {"pruned_order", m.pruned_order}});
  }
  return {{"masks", arr}};
}

MaskSet masks_from_json(const json& j) {
  if (!j.contains("masks") || !j["masks"].is_array()) throw std::invalid_argument("mask file has no 'masks' array");
  MaskSet out;
  for (const auto& e : j["masks"]) {
    StructureMask m;
    m.layer_index = e.at("layer_index").get<std::size_t>();
    m.granularity = parse_granularity(e.at("granularity").get<std::string>());
    const auto size = e.at("size").get<Index>();
    if (size < 1) throw std::invalid_argument("mask size must be positive");
    m.keep.assign(static_cast<std::size_t>(size), true);
    m.pruned_order = e.at("pruned_order").get<std::vector<Index>>();
    for (Index i : m.pruned_order) {
      if (i < 0 || i >= size) throw std::invalid_argument("mask index " + std::to_string(i) + " out of range");
      if (!m.keep[static_cast<std::size_t>(i)]) throw std::invalid_argument("mask index repeated in pruned_order");
      m.keep[static_cast<std::size_t>(i)] = false;
    }
    if (e.contains("pruned") && e["pruned"].get<std::vector<Index>>() != m.pruned()) {
      throw std::invalid_argument("mask 'pruned' disagrees with 'pruned_order'");
    }
    out.push_back(std::move(m));
  }
  return out;
}

json summary_json(const RunResult& r) {
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    json entry{{"seed", s.seed},
               {"final_accuracy", s.final_accuracy},
               {"params", to_json(s.params)},
               {"flops", to_json(s.flops)},
               {"checkpoint", "checkpoints/seed_" + std::to_string(s.seed) + ".pkck"}};
    if (s.masks) entry["masks"] = "masks/seed_" + std::to_string(s.seed) + ".json";
    seeds.push_back(std::move(entry));
  }
  json j{{"config", to_json(r.config)},
         {"repeats", r.seeds.size()},
         {"accuracy", {{"mean", r.mean_accuracy}, {"std", r.std_accuracy}}},
         {"budget", to_json(r.budget)},
         {"seeds", seeds},
         {"features_removed", r.features_removed},
         {"data_sparsity", r.data_sparsity}};
  j["mask_run_accuracy"] = r.mask_run_accuracy ? json(*r.mask_run_accuracy) : json(nullptr);
  if (r.source_masks) j["source_masks"] = "masks/source_masks.json";
  if (r.agreement) {
    j["pre_retrain_agreement"] = {{"samples", r.agreement->samples},
                                  {"mismatches", r.agreement->mismatches},
                                  {"max_relative_diff", r.agreement->max_relative_diff}};
  }
  if (std::holds_alternative<PixelMask>(r.feature_mask)) {
    j["feature_mask"] = {{"pgm", "masks/pixel_mask.pgm"}, {"json", "masks/pixel_mask.json"}};
  } else if (std::holds_alternative<ChannelMask>(r.feature_mask)) {
    j["feature_mask"] = {{"json", "masks/channel_mask.json"}};
  }
  return j;
}

void emit_results(const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir / "masks");
  fs::create_directories(dir / "checkpoints");
  auto write_text = [](const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + p.string());
  };

  std::ostringstream csv;
  csv << "seed,epoch,train_loss,test_accuracy,weight_sparsity,lr\n";
  for (const auto& s : r.seeds) {
    for (const auto& m : s.history) {
      csv << s.seed << ',' << m.epoch << ',' << fmt("%.6f", m.train_loss) << ',' << fmt("%.2f", m.test_accuracy) << ','
          << fmt("%.6f", m.weight_sparsity) << ',' << fmt("%.6g", m.lr) << '\n';
    }
  }
  write_text(dir / "results.csv", csv.str());
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");

  for (const auto& s : r.seeds) {
    if (s.masks) write_text(dir / "masks" / ("seed_" + std::to_string(s.seed) + ".json"), to_json(*s.masks).dump() + "\n");
  }
  if (r.source_masks) write_text(dir / "masks" / "source_masks.json", to_json(*r.source_masks).dump() + "\n");
  for (const auto& s : r.seeds) {
    save_checkpoint(s.checkpoint, dir / "checkpoints" / ("seed_" + std::to_string(s.seed) + ".pkck"));
  }
  if (const auto* p = std::get_if<PixelMask>(&r.feature_mask)) {
    write_pgm_mask(*p, dir / "masks" / "pixel_mask.pgm");
    write_text(dir / "masks" / "pixel_mask.json", to_json(*p).dump() + "\n");
  } else if (const auto* c = std::get_if<ChannelMask>(&r.feature_mask)) {
    write_text(dir / "masks" / "channel_mask.json", to_json(*c).dump() + "\n");
  }
}

SweepGrid parse_grid(const json& j) {
  SweepGrid g;
  g.base = config_from_json(j.value("base", json::object()));
  g.weight_sparsities = j.at("weight_sparsity").get<std::vector<double>>();
  g.data_sparsities = j.at("data_sparsity").get<std::vector<double>>();
  if (g.weight_sparsities.empty() || g.data_sparsities.empty()) throw std::invalid_argument("sweep grid is empty");
  for (double s : g.weight_sparsities) {
    if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("weight sparsity must lie in [0, 1)");
  }
  for (double s : g.data_sparsities) {
    if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("data sparsity must lie in [0, 1)");
  }
  return g;
}

std::vector<SweepCell> sweep(const SweepGrid& grid) { return sweep(grid, load_data(grid.base)); }

std::vector<SweepCell> sweep(const SweepGrid& grid, const DataSplits& data) {
  const Network dense = make_model(grid.base.arch, data.train.sample_shape(), data.train.num_classes);
  std::vector<SweepCell> cells;
  for (double d : grid.data_sparsities) {
    std::optional<FeatureMask> mask;
    std::optional<double> mask_accuracy;
    std::optional<MaskSet> source_masks;
    if (d > 0.0) {
      ExperimentConfig mask_cfg = grid.base;
      mask_cfg.mask_source.reset();
      mask = data_mask(mask_cfg, data, dense, d, mask_accuracy, source_masks);
    }
    for (double w : grid.weight_sparsities) {
      ExperimentConfig cfg = grid.base;
      cfg.mask_source.reset();
      cfg.sparsity = w;
      SweepCell cell{w, d, {}};
      if (mask) {
        cfg.mode = Mode::PruneData;
        cell.result = run_prune_data(cfg, data, dense, *mask, w);
        cell.result.mask_run_accuracy = mask_accuracy;
        cell.result.source_masks = source_masks;
      } else {
        cfg.mode = w > 0.0 ? Mode::PruneWeights : Mode::Baseline;
        cell.result = run(cfg, data);
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string sweep_csv(const SweepGrid& grid, const std::vector<SweepCell>& cells) {
  std::map<std::pair<double, double>, double> acc;
  for (const auto& c : cells) acc[{c.data_sparsity, c.weight_sparsity}] = c.result.mean_accuracy;
  std::ostringstream os;
  os << "data_sparsity";
  for (double w : grid.weight_sparsities) os << ",w=" << fmt("%g", w);
  os << '\n';
  for (double d : grid.data_sparsities) {
    os << fmt("%g", d);
    for (double w : grid.weight_sparsities) {
      const auto it = acc.find({d, w});
      os << ',' << (it == acc.end() ? std::string() : fmt("%.2f", it->second));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace prunekit
