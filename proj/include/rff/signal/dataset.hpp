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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rff/signal/impairments.hpp"
#include "rff/signal/iq_signal.hpp"

namespace rff::signal {

inline constexpr std::uint16_t kShardVersion = 1;
inline constexpr int kManifestVersion = 1;
inline constexpr std::int16_t kCleanSnrCode = -32768;
inline constexpr std::size_t kMaxWindowJitter = 15;

/// -20, -18, ..., 20 dB.
std::vector<Snr> default_snr_list();

struct DatasetSpec {
    DatasetKind kind = DatasetKind::rdr;
    std::size_t n_devices = 32;
    std::size_t records_per_device_per_snr = 10;
    std::vector<Snr> snr_list = default_snr_list();
    double test_fraction = 0.1;
    std::uint64_t seed = 42;
    /// 0 selects the kind's default (1024 CDR, 2048 RDR).
    std::size_t window_length = 0;
    std::size_t records_per_shard = 4096;
    ImpairmentRanges impairments;

    std::size_t effective_window_length() const;
    std::size_t total_records() const { return n_devices * snr_list.size() * records_per_device_per_snr; }
    void validate() const;
};

/// Parsed manifest.json of a generated dataset.
struct DatasetManifest {
    int version = kManifestVersion;
    DatasetKind kind = DatasetKind::rdr;
    std::size_t n_devices = 0;
    std::size_t window_length = 0;
    std::vector<Snr> snr_list;
    std::uint64_t seed = 0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    std::vector<std::string> train_shards;
    std::vector<std::string> test_shards;
    nlohmann::json raw;
};

/// Synthesizes record `index` of the corpus: frame, modulation, device
/// impairments, windowing (with start jitter for RDR) and AWGN. The record's
/// RNG stream depends only on (spec.seed, index).
IQSignal synthesize_record(const DatasetSpec& spec, const ImpairmentProfile& profile, const Snr& snr,
                           std::uint64_t index);

/// Clean (pre-noise) window for the record, as used by synthesize_record.
IQSignal synthesize_clean_window(const DatasetSpec& spec, const ImpairmentProfile& profile, std::uint64_t index);

/// Writes train/test shards and manifest.json into out_dir. On failure any
/// files written by this call are removed and the error is rethrown.
DatasetManifest generate_dataset(const DatasetSpec& spec, const std::filesystem::path& out_dir);

struct Record {
    IQSignal signal;
    int label = 0;
};

/// One split of a generated dataset, fully loaded.
class Dataset {
public:
    Dataset(DatasetManifest manifest, std::vector<Record> records)
        : manifest_(std::move(manifest)), records_(std::move(records)) {}

    const DatasetManifest& manifest() const { return manifest_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const Record& operator[](std::size_t i) const { return records_.at(i); }
    const std::vector<Record>& records() const { return records_; }

    /// A seed-determined permutation of record indices.
    std::vector<std::size_t> shuffled_order(std::uint64_t seed) const;
    /// Consecutive batches of `batch_size` over the shuffled order; the last may be partial.
    std::vector<std::vector<std::size_t>> batches(std::uint64_t seed, std::size_t batch_size) const;

private:
    DatasetManifest manifest_;
    std::vector<Record> records_;
};

DatasetManifest read_manifest(const std::filesystem::path& dir);
/// split is "train" or "test"; anything else is a ConfigError.
Dataset load_dataset(const std::filesystem::path& dir, std::string_view split);

/// Binary shard I/O ("RFFD" format).
void write_shard(const std::filesystem::path& path, std::span<const Record> records, std::size_t length);
std::vector<Record> read_shard(const std::filesystem::path& path, std::size_t expected_length);

nlohmann::json snr_list_to_json(const std::vector<Snr>& list);
std::vector<Snr> snr_list_from_json(const nlohmann::json& j);

}  // namespace rff::signal
