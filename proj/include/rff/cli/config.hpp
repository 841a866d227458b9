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

#include "rff/model/config.hpp"
#include "rff/signal/dataset.hpp"
#include "rff/training/train.hpp"

namespace rff::cli {

struct SpectrumOptions {
    signal::Snr snr = 20;
    std::size_t k = 2;
    std::size_t alignment = 8;
    std::string split = "train";
};

/// The declarative experiment file: sections dataset, spectrum, model, train.
/// Every field is optional; unknown keys are rejected.
struct CliConfig {
    signal::DatasetSpec dataset;
    SpectrumOptions spectrum;
    model::ModelConfig model;
    training::TrainConfig train;
};

CliConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CliConfig& config);
/// Reads and validates a config file. Malformed JSON is a FormatError,
/// schema violations a ConfigError.
CliConfig load_config(const std::filesystem::path& path);

signal::DatasetSpec dataset_spec_from_json(const nlohmann::json& j, signal::DatasetSpec base = {});
nlohmann::json to_json(const signal::DatasetSpec& spec);

/// Seed precedence: explicit flag, then RFF_SEED, then the config value.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_value);

}  // namespace rff::cli
