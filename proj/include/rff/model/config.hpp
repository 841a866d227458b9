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

#include <cstddef>
#include <vector>

#include <json.hpp>

namespace rff::model {

/// Shape of one period branch, derived from the signal length and period.
struct BranchConfig {
    std::size_t period = 0;     // p
    std::size_t frequency = 0;  // round(L / p)
    std::size_t rows = 0;       // N = ceil(L / p)
    std::size_t width = 0;      // d = 2p
    std::size_t n_layers = 0;
    std::size_t n_heads = 1;
    std::size_t k_delay = 0;    // intra-period lags, 1 <= k_delay < p
};

struct ModelConfig {
    std::size_t signal_length = 2048;
    std::vector<std::size_t> periods{72, 56};
    std::size_t n_layers = 5;
    std::size_t n_heads = 1;
    std::size_t k_delay = 3;
    double sigma = 1.0;      // inter-period weight
    double varsigma = 0.1;   // intra-period weight
    std::size_t n_classes = 32;
    double dropout = 0.1;
    std::size_t fusion_hidden = 16;
    std::vector<std::size_t> classifier_hidden{128, 64};
    bool enable_inter = true;
    bool enable_intra = true;
    /// Use the FFT correlation route when no gradient is being recorded.
    bool fft_inference = true;

    /// One entry per period. k_delay is capped at p - 1 per branch.
    std::vector<BranchConfig> branches() const;
    /// Sum of 2p over all branches: the classifier input width.
    std::size_t fused_width() const;
    void validate() const;
};

nlohmann::json to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

}  // namespace rff::model
