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
#include <span>
#include <vector>

#include "rff/numerics/tensor.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-5;
};

/// First/second moment buffers (one per parameter) and the update counter.
struct OptimizerState {
    std::vector<std::vector<Real>> first_moment;
    std::vector<std::vector<Real>> second_moment;
    std::uint64_t step = 0;

    bool initialized() const { return !first_moment.empty(); }
};

/// One AdamW update using each parameter's accumulated grad.
///
/// Weight decay is decoupled: p <- p - lr*wd*p, then the bias-corrected Adam
/// step is applied. An empty state is initialized to zeros on first use;
/// otherwise its buffers must match the parameter shapes.
void adamw_step(std::span<Tensor> params, OptimizerState& state, double lr, const AdamWConfig& cfg);

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
