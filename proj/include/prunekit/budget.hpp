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

#ifndef PRUNEKIT_BUDGET_HPP
#define PRUNEKIT_BUDGET_HPP

#include "prunekit/network.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace prunekit {

struct Count {
  std::int64_t total = 0;
  std::int64_t nonzero = 0;

  friend bool operator==(const Count&, const Count&) = default;
};

struct LayerBudget {
  std::size_t layer_index = 0;
  Count params;
  Count flops;
};

// Per parameter layer. Params count weights and biases; one FLOP is one
// multiply-accumulate of a weight (bias adds, activations and pooling are
// free). The nonzero variants skip entries / MACs whose weight is exactly 0.
template <typename Scalar>
std::vector<LayerBudget> layer_budgets(const NetworkT<Scalar>& net);

template <typename Scalar>
Count count_params(const NetworkT<Scalar>& net);

template <typename Scalar>
Count count_flops(const NetworkT<Scalar>& net);

struct BudgetReport {
  Count baseline_params;
  Count baseline_flops;
  Count params;
  Count flops;
  // 100 * (1 - candidate / baseline) on the nonzero counts.
  double params_reduction = 0.0;
  double flops_reduction = 0.0;
};

template <typename Scalar>
BudgetReport budget_report(const NetworkT<Scalar>& baseline, const NetworkT<Scalar>& candidate);

// From precomputed counts. Throws if a baseline count is zero.
BudgetReport budget_report(Count baseline_params, Count baseline_flops, Count params, Count flops);

nlohmann::json to_json(const Count& c);
nlohmann::json to_json(const BudgetReport& report);

// Aligned text table: one row per (label, report), thousands of units with
// the reduction in brackets, as in "52.71 (-49.90%)".
std::string budget_table(const std::vector<std::pair<std::string, BudgetReport>>& rows);

#define PRUNEKIT_EXTERN_BUDGET(S)                                                       \
  extern template std::vector<LayerBudget> layer_budgets<S>(const NetworkT<S>&);       \
  extern template Count count_params<S>(const NetworkT<S>&);                           \
  extern template Count count_flops<S>(const NetworkT<S>&);                            \
  extern template BudgetReport budget_report<S>(const NetworkT<S>&, const NetworkT<S>&);

PRUNEKIT_EXTERN_BUDGET(float)
PRUNEKIT_EXTERN_BUDGET(double)
#undef PRUNEKIT_EXTERN_BUDGET

}  // namespace prunekit

#endif  // PRUNEKIT_BUDGET_HPP
