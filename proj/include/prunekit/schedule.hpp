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

#ifndef PRUNEKIT_SCHEDULE_HPP
#define PRUNEKIT_SCHEDULE_HPP

#include <cstdint>

namespace prunekit {

// One-cycle learning-rate policy: linear warmup from nominal/25 to the
// nominal rate, then cosine annealing down to nominal/1e4.
struct LrSchedule {
  double nominal_lr = 1e-3;
  double warmup_fraction = 0.25;
  std::int64_t total_steps = 1;

  static constexpr double kStartDivisor = 25.0;
  static constexpr double kFinalDivisor = 1e4;

  // Step at which the nominal rate is reached.
  std::int64_t warmup_steps() const;
};

// Throws std::out_of_range outside [0, total_steps].
double lr_at(const LrSchedule& schedule, std::int64_t step);

}  // namespace prunekit

#endif  // PRUNEKIT_SCHEDULE_HPP
