/*
 * Copyright 2026 The mpdrff Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rff/numerics/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rff/common/error.hpp"

namespace rff::nn {

void LrSchedule::validate() const {
    if (!(max_lr > 0)) {
        throw ConfigError("lr schedule: max_lr must be positive");
    }
    if (warmup_steps == 0 || warmup_steps >= total_steps) {
        throw ConfigError("lr schedule: need 0 < warmup_steps (" + std::to_string(warmup_steps) +
                          ") < total_steps (" + std::to_string(total_steps) + ")");
    }
}

double lr_at(const LrSchedule& s, std::uint64_t step) {
    step = std::min(step, s.total_steps);
    if (step < s.warmup_steps) {
        return s.max_lr * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
    }
    const double progress = static_cast<double>(step - s.warmup_steps) /
                            static_cast<double>(s.total_steps - s.warmup_steps);
    return std::max(0.0, 0.5 * s.max_lr * (1.0 + std::cos(std::numbers::pi * progress)));
}

}  // namespace rff::nn
