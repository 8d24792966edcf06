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

#include "prunekit/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace prunekit {

std::int64_t LrSchedule::warmup_steps() const {
  const auto steps = std::llround(warmup_fraction * static_cast<double>(total_steps));
  return std::clamp<std::int64_t>(steps, 1, std::max<std::int64_t>(total_steps, 1));
}

double lr_at(const LrSchedule& schedule, std::int64_t step) {
  if (schedule.total_steps < 1 || !(schedule.warmup_fraction > 0.0 && schedule.warmup_fraction < 1.0) ||
      !(schedule.nominal_lr > 0.0)) {
    throw std::invalid_argument("invalid learning-rate schedule");
  }
  if (step < 0 || step > schedule.total_steps) {
    throw std::out_of_range("lr step " + std::to_string(step) + " outside [0, " +
                            std::to_string(schedule.total_steps) + "]");
  }
  const double peak = schedule.nominal_lr;
  const double start = peak / LrSchedule::kStartDivisor;
  const double floor = peak / LrSchedule::kFinalDivisor;
  const std::int64_t warm = schedule.warmup_steps();
  if (step <= warm) {
    const double t = static_cast<double>(step) / static_cast<double>(warm);
    // Written so t == 1 lands exactly on the nominal rate.
    return peak - (peak - start) * (1.0 - t);
  }
  const double t = static_cast<double>(step - warm) / static_cast<double>(schedule.total_steps - warm);
  return floor + (peak - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace prunekit
