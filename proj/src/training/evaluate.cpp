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

#include "rff/training/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "rff/common/error.hpp"
#include "rff/common/parallel.hpp"
#include "rff/numerics/tensor.hpp"

namespace rff::training {
namespace {

// Ascending dB, clean last.
bool snr_less(const signal::Snr& a, const signal::Snr& b) {
    if (a.has_value() != b.has_value()) return a.has_value();
    return a.has_value() && *a < *b;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path.string());
    return os;
}

std::vector<const signal::IQSignal*> batch_of(std::span<const signal::Record> records, std::size_t lo,
                                              std::size_t hi) {
    std::vector<const signal::IQSignal*> batch;
    batch.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) batch.push_back(&records[i].signal);
    return batch;
}

void check_compatible(const model::Checkpoint& ckpt, const signal::Dataset& data) {
    if (data.empty()) throw ConfigError("dataset split is empty");
    if (data.manifest().n_devices != ckpt.config.n_classes) {
        throw ConfigError("checkpoint has " + std::to_string(ckpt.config.n_classes) + " classes but the dataset has " +
                          std::to_string(data.manifest().n_devices) + " devices");
    }
    if (data.manifest().window_length != ckpt.config.signal_length) {
        throw ConfigError("checkpoint expects length " + std::to_string(ckpt.config.signal_length) +
                          " but the dataset windows have length " + std::to_string(data.manifest().window_length));
    }
}

}  // namespace

Metrics compute_metrics(std::span<const int> labels, std::span<const signal::Snr> snrs,
                        std::span<const int> predictions, std::size_t n_classes, const signal::Snr& confusion_snr) {
    if (labels.size() != snrs.size() || labels.size() != predictions.size()) {
        throw DimensionError("compute_metrics: label, snr and prediction counts differ");
    }
    if (labels.empty()) throw ConfigError("compute_metrics: no records");
    Metrics m;
    m.n_classes = n_classes;
    m.n_records = labels.size();
    m.confusion_snr = confusion_snr;
    m.confusion_counts.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    std::vector<std::pair<signal::Snr, std::pair<std::size_t, std::size_t>>> buckets;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto label = static_cast<std::size_t>(labels[i]);
        const auto pred = static_cast<std::size_t>(predictions[i]);
        if (labels[i] < 0 || label >= n_classes || predictions[i] < 0 || pred >= n_classes) {
            throw ConfigError("compute_metrics: class index out of range at record " + std::to_string(i));
        }
        const bool hit = label == pred;
        correct += hit;
        auto it = std::find_if(buckets.begin(), buckets.end(), [&](const auto& b) { return b.first == snrs[i]; });
        if (it == buckets.end()) {
            buckets.push_back({snrs[i], {0, 0}});
            it = buckets.end() - 1;
        }
        it->second.first += hit;
        it->second.second += 1;
        if (snrs[i] == confusion_snr) ++m.confusion_counts[label][pred];
    }
    std::sort(buckets.begin(), buckets.end(), [](const auto& a, const auto& b) { return snr_less(a.first, b.first); });
    for (const auto& [snr, counts] : buckets) {
        m.per_snr.push_back({snr, counts.first, counts.second,
                             static_cast<double>(counts.first) / static_cast<double>(counts.second)});
    }
    m.overall_accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    m.confusion_percent.assign(n_classes, std::vector<double>(n_classes, 0.0));
    for (std::size_t r = 0; r < n_classes; ++r) {
        std::size_t row_total = 0;
        for (const auto c : m.confusion_counts[r]) row_total += c;
        if (row_total == 0) continue;
        for (std::size_t c = 0; c < n_classes; ++c) {
            m.confusion_percent[r][c] =
                100.0 * static_cast<double>(m.confusion_counts[r][c]) / static_cast<double>(row_total);
        }
    }
    return m;
}

std::vector<int> predict(const model::ModelParams& params, const model::ModelConfig& config,
                         std::span<const signal::Record> records, std::size_t batch_size) {
    if (batch_size == 0) throw ConfigError("predict: batch size must be >= 1");
    std::vector<int> out(records.size());
    const std::size_t n_batches = (records.size() + batch_size - 1) / batch_size;
    parallel_for(n_batches, 1, [&](std::size_t first, std::size_t last) {
        nn::NoGradGuard no_grad;
        for (std::size_t b = first; b < last; ++b) {
            const std::size_t lo = b * batch_size;
            const std::size_t hi = std::min(records.size(), lo + batch_size);
            const auto batch = batch_of(records, lo, hi);
            const auto logits = model::model_forward(batch, params, config).logits;
            const auto data = logits.data();
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const auto row = data.subspan(i * config.n_classes, config.n_classes);
                out[lo + i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
            }
        }
    });
    return out;
}

Metrics evaluate(const model::Checkpoint& ckpt, const signal::Dataset& data, const signal::Snr& confusion_snr,
                 std::size_t batch_size) {
    check_compatible(ckpt, data);
    const auto pred = predict(ckpt.params, ckpt.config, data.records(), batch_size);
    std::vector<int> labels;
    std::vector<signal::Snr> snrs;
    for (const auto& r : data.records()) {
        labels.push_back(r.label);
        snrs.push_back(r.signal.snr_db);
    }
    return compute_metrics(labels, snrs, pred, ckpt.config.n_classes, confusion_snr);
}

void write_metrics(const std::filesystem::path& dir, const Metrics& m) {
    std::filesystem::create_directories(dir);
    {
        auto os = open_out(dir / "accuracy.csv");
        os << "snr_db,accuracy\n";
        char buf[64];
        for (const auto& s : m.per_snr) {
            std::snprintf(buf, sizeof buf, "%.6f", s.accuracy);
            os << signal::snr_to_string(s.snr) << ',' << buf << '\n';
        }
    }
    {
        auto os = open_out(dir / "confusion.csv");
        char buf[32];
        for (const auto& row : m.confusion_percent) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                std::snprintf(buf, sizeof buf, "%.4f", row[c]);
                os << (c ? "," : "") << buf;
            }
            os << '\n';
        }
    }
}

void export_embeddings(const model::Checkpoint& ckpt, const signal::Dataset& data, const std::filesystem::path& out,
                       std::size_t batch_size) {
    check_compatible(ckpt, data);
    if (batch_size == 0) throw ConfigError("export_embeddings: batch size must be >= 1");
    const std::size_t width = ckpt.config.fused_width();
    auto os = open_out(out);
    os << "label,snr";
    for (std::size_t j = 0; j < width; ++j) os << ",f" << j;
    os << '\n';
    nn::NoGradGuard no_grad;
    const auto& records = data.records();
    char buf[32];
    for (std::size_t lo = 0; lo < records.size(); lo += batch_size) {
        const std::size_t hi = std::min(records.size(), lo + batch_size);
        const auto batch = batch_of(records, lo, hi);
        const auto fused = model::model_forward(batch, ckpt.params, ckpt.config).fused;
        const auto values = fused.data();
        for (std::size_t i = 0; i < batch.size(); ++i) {
            os << records[lo + i].label << ',' << signal::snr_to_string(records[lo + i].signal.snr_db);
            for (std::size_t j = 0; j < width; ++j) {
                std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(values[i * width + j]));
                os << ',' << buf;
            }
            os << '\n';
        }
    }
    if (!os) throw IoError("write failed for " + out.string());
}

}  // namespace rff::training
