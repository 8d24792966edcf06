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

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace prunekit {

namespace {

template <typename Scalar>
std::int64_t nonzeros(const TensorT<Scalar>& t) {
  return static_cast<std::int64_t>((t.vec().array() != Scalar(0)).count());
}

}  // namespace

template <typename Scalar>
std::vector<LayerBudget> layer_budgets(const NetworkT<Scalar>& net) {
  const auto shapes = infer_shapes(net);
  std::vector<LayerBudget> out;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (const auto* l = std::get_if<LinearT<Scalar>>(&net.layers[i])) {
      const std::int64_t w = l->weights.size(), w_nz = nonzeros(l->weights);
      out.push_back({i, {w + l->bias.size(), w_nz + nonzeros(l->bias)}, {w, w_nz}});
    } else if (const auto* c = std::get_if<ConvT<Scalar>>(&net.layers[i])) {
      const Shape& y = shapes[i + 1];
      const std::int64_t positions = y[1] * y[2];
      const std::int64_t w = c->weights.size(), w_nz = nonzeros(c->weights);
      out.push_back({i, {w + c->bias.size(), w_nz + nonzeros(c->bias)}, {w * positions, w_nz * positions}});
    }
  }
  return out;
}

template <typename Scalar>
Count count_params(const NetworkT<Scalar>& net) {
  Count c;
  for (const auto& l : layer_budgets(net)) {
    c.total += l.params.total;
    c.nonzero += l.params.nonzero;
  }
  return c;
}

template <typename Scalar>
Count count_flops(const NetworkT<Scalar>& net) {
  Count c;
  for (const auto& l : layer_budgets(net)) {
    c.total += l.flops.total;
    c.nonzero += l.flops.nonzero;
  }
  return c;
}

BudgetReport budget_report(Count baseline_params, Count baseline_flops, Count params, Count flops) {
  if (baseline_params.nonzero == 0 || baseline_flops.nonzero == 0) {
    throw std::invalid_argument("baseline budget is zero");
  }
  BudgetReport r{baseline_params, baseline_flops, params, flops, 0.0, 0.0};
  r.params_reduction = 100.0 * (1.0 - static_cast<double>(params.nonzero) / static_cast<double>(baseline_params.nonzero));
  r.flops_reduction = 100.0 * (1.0 - static_cast<double>(flops.nonzero) / static_cast<double>(baseline_flops.nonzero));
  return r;
}

template <typename Scalar>
BudgetReport budget_report(const NetworkT<Scalar>& baseline, const NetworkT<Scalar>& candidate) {
  return budget_report(count_params(baseline), count_flops(baseline), count_params(candidate), count_flops(candidate));
}

nlohmann::json to_json(const Count& c) { return {{"total", c.total}, {"nonzero", c.nonzero}}; }

nlohmann::json to_json(const BudgetReport& r) {
  return {{"baseline", {{"params", to_json(r.baseline_params)}, {"flops", to_json(r.baseline_flops)}}},
          {"candidate", {{"params", to_json(r.params)}, {"flops", to_json(r.flops)}}},
          {"params_reduction_pct", r.params_reduction},
          {"flops_reduction_pct", r.flops_reduction}};
}

std::string budget_table(const std::vector<std::pair<std::string, BudgetReport>>& rows) {
  auto cell = [](std::int64_t count, double reduction, bool show) {
    char buf[64];
    if (show) {
      std::snprintf(buf, sizeof buf, "%.2f (-%.2f%%)", static_cast<double>(count) / 1000.0, reduction);
    } else {
      std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(count) / 1000.0);
    }
    return std::string(buf);
  };
  std::size_t label_w = 8;
  for (const auto& [label, _] : rows) label_w = std::max(label_w, label.size());
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(label_w)) << "" << "  " << std::setw(22) << "Parameters (k)"
     << "FLOPs (k)\n";
  for (const auto& [label, r] : rows) {
    const bool show = r.params.nonzero != r.baseline_params.nonzero || r.flops.nonzero != r.baseline_flops.nonzero;
    os << std::setw(static_cast<int>(label_w)) << label << "  " << std::setw(22)
       << cell(r.params.nonzero, r.params_reduction, show) << cell(r.flops.nonzero, r.flops_reduction, show) << '\n';
  }
  return os.str();
}

#define PRUNEKIT_INSTANTIATE_BUDGET(S)                                           \
  template std::vector<LayerBudget> layer_budgets<S>(const NetworkT<S>&);       \
  template Count count_params<S>(const NetworkT<S>&);                           \
  template Count count_flops<S>(const NetworkT<S>&);                            \
  template BudgetReport budget_report<S>(const NetworkT<S>&, const NetworkT<S>&);

PRUNEKIT_INSTANTIATE_BUDGET(float)
PRUNEKIT_INSTANTIATE_BUDGET(double)

}  // namespace prunekit
