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

#include "prunekit/budget.hpp"
#include "prunekit/checkpoint.hpp"
#include "prunekit/experiment.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace pk = prunekit;

namespace {

std::string default_data_dir() {
  const char* env = std::getenv("PRUNEKIT_DATA_DIR");
  return env ? env : "data";
}

template <typename E>
CLI::Validator enum_check(E (*parse)(std::string_view), const std::string& what) {
  return CLI::Validator(
      [parse](std::string& s) {
        try {
          parse(s);
        } catch (const std::exception& e) {
          return std::string(e.what());
        }
        return std::string();
      },
      what);
}

void print_run(const pk::RunResult& r) {
  for (const auto& s : r.seeds) std::printf("seed %llu: %.2f%%\n", static_cast<unsigned long long>(s.seed), s.final_accuracy);
  std::printf("accuracy %.2f +- %.2f over %zu runs\n", r.mean_accuracy, r.std_accuracy, r.seeds.size());
  if (r.mask_run_accuracy) std::printf("mask run accuracy %.2f%%\n", *r.mask_run_accuracy);
  if (r.features_removed > 0) {
    std::printf("input features removed: %lld (%.2f%%)\n", static_cast<long long>(r.features_removed),
                100.0 * r.data_sparsity);
  }
  if (r.agreement) {
    std::printf("shrunk vs masked before retraining: %lld/%lld predictions differ, max rel diff %.3g\n",
                static_cast<long long>(r.agreement->mismatches), static_cast<long long>(r.agreement->samples),
                r.agreement->max_relative_diff);
  }
  std::cout << pk::budget_table({{std::string(pk::mode_name(r.config.mode)), r.budget}});
}

int budget_command(const std::string& checkpoint, const std::string& baseline, bool as_json) {
  const pk::Checkpoint ckpt = pk::load_checkpoint(checkpoint);
  const auto layers = pk::layer_budgets(ckpt.net);
  const pk::Count p = pk::count_params(ckpt.net), f = pk::count_flops(ckpt.net);
  std::optional<pk::BudgetReport> report;
  if (!baseline.empty()) report = pk::budget_report(pk::load_checkpoint(baseline).net, ckpt.net);

  if (as_json) {
    nlohmann::json j{{"params", pk::to_json(p)}, {"flops", pk::to_json(f)}, {"layers", nlohmann::json::array()}};
    for (const auto& l : layers) {
      j["layers"].push_back({{"layer_index", l.layer_index},
                             {"name", pk::layer_name(ckpt.net.layers[l.layer_index])},
                             {"params", pk::to_json(l.params)},
                             {"flops", pk::to_json(l.flops)}});
    }
    if (report) j["report"] = pk::to_json(*report);
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::printf("input %s\n", pk::to_string(ckpt.net.input_shape).c_str());
  std::printf("%-6s %-10s %14s %14s %16s %16s\n", "layer", "type", "params", "nonzero", "flops", "nonzero");
  for (const auto& l : layers) {
    std::printf("%-6zu %-10s %14lld %14lld %16lld %16lld\n", l.layer_index,
                pk::layer_name(ckpt.net.layers[l.layer_index]).c_str(), static_cast<long long>(l.params.total),
                static_cast<long long>(l.params.nonzero), static_cast<long long>(l.flops.total),
                static_cast<long long>(l.flops.nonzero));
  }
  std::printf("%-17s %14lld %14lld %16lld %16lld\n", "total", static_cast<long long>(p.total),
              static_cast<long long>(p.nonzero), static_cast<long long>(f.total), static_cast<long long>(f.nonzero));
  if (report) std::cout << '\n' << pk::budget_table({{"vs baseline", *report}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured pruning experiments for small image classifiers"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML file with [run] / [sweep] / [budget] sections mirroring the flags")
      ->configurable(false);

  pk::ExperimentConfig cfg;
  cfg.data_dir = default_data_dir();
  std::string mode = "baseline", dataset = "mnist", arch = "mlp", curve = "cubic", optimizer = "adam";
  std::string out = "runs/out", mask, data_dir = cfg.data_dir.string(), augment = "auto";

  auto* run = app.add_subcommand("run", "Train one configuration over its repeats and write results");
  run->fallthrough();
  run->add_option("--mode", mode, "baseline | prune_weights | prune_data | prune_both")
      ->check(enum_check(pk::parse_mode, "MODE"))
      ->capture_default_str();
  run->add_option("--dataset", dataset, "mnist | cifar10 | cifar100")
      ->check(enum_check(pk::parse_dataset, "DATASET"))
      ->capture_default_str();
  run->add_option("--arch", arch, "mlp | smallvgg")->check(enum_check(pk::parse_arch, "ARCH"))->capture_default_str();
  run->add_option("--sparsity", cfg.sparsity, "Target structure sparsity")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
  run->add_option("--epochs", cfg.epochs, "0 = 20 for mlp, 50 for smallvgg")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", cfg.seed, "First seed; repeats use seed, seed+1, ...")->capture_default_str();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_option("--mask", mask, "Mask source for prune_data / prune_both")->check(CLI::ExistingFile);
  run->add_option("--curve", curve, "cubic | cosine")->check(enum_check(pk::parse_curve, "CURVE"))->capture_default_str();
  run->add_option("--data-dir", data_dir, "Directory holding mnist/ and cifar-10-batches-bin/")->capture_default_str();
  run->add_option("--repeats", cfg.repeats, "0 = 5 for mlp, 3 for smallvgg")->check(CLI::NonNegativeNumber);
  run->add_option("--batch-size", cfg.batch_size)->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--lr", cfg.lr, "Peak learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--optimizer", optimizer, "adam | sgd")
      ->check(enum_check(pk::parse_optimizer, "OPTIMIZER"))
      ->capture_default_str();
  run->add_flag("--inherit-weights", cfg.inherit_weights, "prune_both: retrain from surviving trained weights");
  run->add_option("--augment", augment, "auto | on | off")->check(CLI::IsMember({"auto", "on", "off"}))->capture_default_str();
  run->add_option("--train-limit", cfg.train_limit, "Use the first n training samples")->check(CLI::NonNegativeNumber);
  run->add_option("--test-limit", cfg.test_limit, "Use the first n test samples")->check(CLI::NonNegativeNumber);

  std::string grid, sweep_out = "runs/sweep", sweep_data_dir = data_dir;
  auto* sweep = app.add_subcommand("sweep", "Weight x data sparsity grid");
  sweep->fallthrough();
  sweep->add_option("--grid", grid, "JSON grid file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Output directory")->capture_default_str();
  sweep->add_option("--data-dir", sweep_data_dir)->capture_default_str();

  std::string checkpoint, baseline;
  bool as_json = false;
  auto* budget = app.add_subcommand("budget", "Parameter and FLOP counts of a checkpoint");
  budget->fallthrough();
  budget->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  budget->add_option("--baseline", baseline, "Checkpoint to report reductions against")->check(CLI::ExistingFile);
  budget->add_flag("--json", as_json);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      cfg.mode = pk::parse_mode(mode);
      cfg.dataset = pk::parse_dataset(dataset);
      cfg.arch = pk::parse_arch(arch);
      cfg.curve = pk::parse_curve(curve);
      cfg.optimizer = pk::parse_optimizer(optimizer);
      cfg.output_dir = out;
      cfg.data_dir = data_dir;
      if (!mask.empty()) cfg.mask_source = mask;
      if (augment != "auto") cfg.augment = augment == "on";
      const pk::RunResult result = pk::run(cfg);
      pk::emit_results(result, cfg.output_dir);
      print_run(result);
      std::printf("results in %s\n", cfg.output_dir.string().c_str());
    } else if (*sweep) {
      std::ifstream in(grid);
      auto j = nlohmann::json::parse(in);
      pk::SweepGrid g = pk::parse_grid(j);
      if (!j.value("base", nlohmann::json::object()).contains("data_dir")) g.base.data_dir = sweep_data_dir;
      const auto cells = pk::sweep(g);
      std::filesystem::create_directories(sweep_out);
      const std::string csv = pk::sweep_csv(g, cells);
      std::ofstream(std::filesystem::path(sweep_out) / "sweep.csv") << csv;
      nlohmann::json all = nlohmann::json::array();
      for (const auto& c : cells) {
        all.push_back({{"weight_sparsity", c.weight_sparsity},
                       {"data_sparsity", c.data_sparsity},
                       {"summary", pk::summary_json(c.result)}});
      }
      std::ofstream(std::filesystem::path(sweep_out) / "sweep.json") << all.dump(2) << '\n';
      std::cout << csv;
    } else if (*budget) {
      return budget_command(checkpoint, baseline, as_json);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "prunekit: %s\n", e.what());
    return 1;
  }
  return 0;
}
