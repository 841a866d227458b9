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

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "rff/model/mpdformer.hpp"
#include "rff/numerics/optim.hpp"

// Checkpoint layout (little-endian):
//   "MPDF" | u16 version | u32 n | n bytes of JSON | parameters as f32 in
//   ModelParams::named() order | optional AdamW moments (first, then second) as f32
// The JSON block holds the model config, the period set, the parameter layout
// and a free-form "extra" object for training state.

namespace rff::model {
inline namespace RFF_NN_ABI {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct Checkpoint {
    ModelConfig config;
    ModelParams params;
    nlohmann::json periods;  // period file contents, or null
    nlohmann::json extra = nlohmann::json::object();
    std::optional<nn::OptimizerState> optimizer;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws FormatError (with byte offset) on malformed input and ConfigError if
/// the stored layout disagrees with the stored config.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace RFF_NN_ABI
}  // namespace rff::model
