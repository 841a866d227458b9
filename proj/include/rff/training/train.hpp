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
#include <filesystem>
#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "rff/model/checkpoint.hpp"
#include "rff/spectrum/spectrum.hpp"

namespace rff::training {

/// Optimization settings. Defaults are the full-scale RDR regime; desk-scale
/// runs override them from the config file.
struct TrainConfig {
    double max_lr = 7e-4;
    std::uint64_t warmup_steps = 4080;
    double weight_decay = 1e-5;
    std::size_t batch_size = 512;
    std::size_t epochs = 300;
    std::uint64_t seed = 42;
    /// Share of each (device, SNR) cell of the training split held out for
    /// best-checkpoint selection. 0 disables validation.
    double validation_fraction = 0.1;
    /// Emit a log line every this many steps.
    std::size_t log_every = 1;
    std::size_t eval_batch_size = 256;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
/// Missing keys keep their defaults; unknown keys are a ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct TrainRequest {
    std::filesystem::path dataset_dir;
    model::ModelConfig model;  // periods and signal length are taken from `periods`
    spectrum::PeriodSet periods;
    TrainConfig train;
    std::filesystem::path out;  // final checkpoint; the best one goes to out + ".best"
    /// Continue from this checkpoint (written by an earlier run with the same settings).
    std::optional<std::filesystem::path> resume;
    /// Stop after this many epochs in this invocation (0: run to completion).
    std::size_t stop_after_epochs = 0;
    std::ostream* log = nullptr;   // step,lr,loss,acc lines
    std::ostream* info = nullptr;  // per-epoch summaries
};

struct TrainResult {
    std::uint64_t steps = 0;
    std::size_t epochs_completed = 0;
    double final_loss = 0;  // mean training loss of the last epoch
    std::optional<double> best_validation_accuracy;
    std::filesystem::path final_checkpoint;
    std::filesystem::path best_checkpoint;
};

/// Minibatch AdamW training with linear warmup and cosine decay. A checkpoint
/// is written to `out` after every epoch, so an interrupted run can resume.
/// Throws NumericalError naming the step and batch if the loss is not finite.
TrainResult train(const TrainRequest& request);

/// Path of the best-by-validation checkpoint that belongs to `out`.
std::filesystem::path best_checkpoint_path(const std::filesystem::path& out);

}  // namespace rff::training
