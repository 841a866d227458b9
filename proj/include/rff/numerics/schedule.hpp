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

#pragma once

#include <cstdint>

namespace rff::nn {

/// Linear warmup from 0 to max_lr, then cosine decay to 0 at total_steps.
struct LrSchedule {
    double max_lr = 7e-4;
    std::uint64_t warmup_steps = 4080;
    std::uint64_t total_steps = 4080 * 20;

    /// Throws ConfigError unless max_lr > 0 and 0 < warmup_steps < total_steps.
    void validate() const;
};

/// Learning rate at `step`; steps past total_steps clamp to the final value (0).
double lr_at(const LrSchedule& schedule, std::uint64_t step);

}  // namespace rff::nn
