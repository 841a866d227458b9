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
#include <span>
#include <vector>

#include "rff/model/checkpoint.hpp"
#include "rff/signal/dataset.hpp"

namespace rff::training {

struct SnrAccuracy {
    signal::Snr snr;
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0;
};

struct Metrics {
    std::size_t n_classes = 0;
    std::size_t n_records = 0;
    double overall_accuracy = 0;
    std::vector<SnrAccuracy> per_snr;  // ascending SNR, "clean" last
    signal::Snr confusion_snr;
    /// Row = true label, column = predicted label. Counts, and the same rows
    /// normalized to percentages (rows without samples stay zero).
    std::vector<std::vector<std::size_t>> confusion_counts;
    std::vector<std::vector<double>> confusion_percent;
};

Metrics compute_metrics(std::span<const int> labels, std::span<const signal::Snr> snrs,
                        std::span<const int> predictions, std::size_t n_classes, const signal::Snr& confusion_snr);

/// Argmax class of every record, in eval mode.
std::vector<int> predict(const model::ModelParams& params, const model::ModelConfig& config,
                         std::span<const signal::Record> records, std::size_t batch_size);

/// Throws ConfigError on an empty split or if the dataset's device count does
/// not match the checkpoint's classes.
Metrics evaluate(const model::Checkpoint& ckpt, const signal::Dataset& data, const signal::Snr& confusion_snr,
                 std::size_t batch_size = 256);

/// accuracy.csv (snr_db,accuracy) and confusion.csv (row-major percentages).
void write_metrics(const std::filesystem::path& dir, const Metrics& metrics);

/// One CSV row per record: label, snr, then the fused pre-classifier vector.
void export_embeddings(const model::Checkpoint& ckpt, const signal::Dataset& data, const std::filesystem::path& out,
                       std::size_t batch_size = 256);

}  // namespace rff::training
