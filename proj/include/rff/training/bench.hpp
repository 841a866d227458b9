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

#include "rff/model/mpdformer.hpp"

namespace rff::training {

/// Published figures for the 2048-sample model.
inline constexpr std::size_t kReferenceParams = 1758752;
inline constexpr double kReferenceMflops = 54.7;

struct BenchResult {
    std::size_t batch = 0;
    std::size_t iters = 0;
    double mean_ms = 0;
    double p50_ms = 0;
    double p95_ms = 0;
    std::uint64_t macs = 0;          // per signal
    double mflops = 0;               // 2 * macs / 1e6
    std::size_t params_total = 0;
};

/// Times eval-mode forward passes on random signals after a short warmup.
/// Requires iters >= 10.
BenchResult bench_inference(const model::ModelParams& params, const model::ModelConfig& config, std::size_t batch,
                            std::size_t iters, std::uint64_t seed);

}  // namespace rff::training
