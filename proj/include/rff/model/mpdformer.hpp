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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rff/common/rng.hpp"
#include "rff/model/config.hpp"
#include "rff/model/layers.hpp"

namespace rff::model {
inline namespace RFF_NN_ABI {

struct EncoderLayerParams {
    Affine query, key, value, output;
    Affine ffn_in;   // [d, N] + [N]
    Affine ffn_out;  // [N, d] + [d]
    NormParams norm1, norm2;
};

struct BranchParams {
    Affine projection;  // [d, d] + [d]
    std::vector<EncoderLayerParams> layers;
};

struct ModelParams {
    std::vector<BranchParams> branches;
    Tensor fusion_w1;  // [k, h]
    Tensor fusion_w2;  // [h, k]
    std::vector<Affine> classifier;

    /// Every tensor with a stable dotted name, in checkpoint order.
    std::vector<std::pair<std::string, Tensor>> named() const;
    std::vector<Tensor> tensors() const;
};

/// Xavier-uniform weights, zero biases, unit norm gains; deterministic in seed.
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws ConfigError if the tensor shapes do not match the config.
void check_params(const ModelConfig& config, const ModelParams& params);

struct ForwardOptions {
    bool training = false;
    Rng* rng = nullptr;  // required when training with dropout > 0
};

struct ForwardOutput {
    Tensor logits;         // [B, n_classes]
    Tensor fused;          // [B, fused_width]
    Tensor branch_weights; // [B, k]
};

ForwardOutput model_forward(std::span<const signal::IQSignal* const> batch, const ModelParams& params,
                            const ModelConfig& config, const ForwardOptions& options = {});
ForwardOutput model_forward(const signal::IQSignal& x, const ModelParams& params, const ModelConfig& config,
                            const ForwardOptions& options = {});

/// One encoder layer on [B, N, d]. Exposed for tests.
Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& layer, const BranchConfig& branch,
                     const ModelConfig& config);

struct ParamBlock {
    std::string name;
    std::size_t count = 0;
    std::optional<std::size_t> reference;  // published figure, where one exists
};

struct ParamReport {
    std::vector<ParamBlock> blocks;
    std::size_t total = 0;
};

/// Per-block counts: branch projections, encoder stacks, fusion, classifier layers.
ParamReport count_params(const ModelConfig& config, const ModelParams& params);

/// Multiply-accumulate count of one forward pass for a single signal.
std::uint64_t estimate_macs(const ModelConfig& config);

}  // namespace RFF_NN_ABI
}  // namespace rff::model
