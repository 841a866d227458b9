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

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rff::signal {

inline constexpr double kSampleRateHz = 8e6;
inline constexpr double kCarrierHz = 2.475e9;  // metadata only; everything runs at baseband
inline constexpr double kChipRateHz = 2e6;
inline constexpr std::size_t kSamplesPerChip = 4;
inline constexpr std::size_t kChipsPerSymbol = 32;
inline constexpr std::size_t kSamplesPerOctet = 2 * kChipsPerSymbol * kSamplesPerChip;

enum class DatasetKind { cdr, rdr };

std::string to_string(DatasetKind kind);
/// Accepts "CDR"/"RDR" in any case.
DatasetKind parse_dataset_kind(std::string_view text);
/// 1024 for CDR, 2048 for RDR.
std::size_t default_window_length(DatasetKind kind);

/// SNR in dB, or nullopt for a noise-free ("clean") record.
using Snr = std::optional<int>;

std::string snr_to_string(const Snr& snr);

/// A sampled complex-baseband waveform. Each sample holds I (real) and Q (imag).
struct IQSignal {
    std::vector<std::complex<float>> samples;
    double sample_rate_hz = kSampleRateHz;
    int device_id = -1;
    Snr snr_db;

    std::size_t length() const { return samples.size(); }
    /// Mean |x|^2 over all samples.
    double mean_power() const;
};

}  // namespace rff::signal
