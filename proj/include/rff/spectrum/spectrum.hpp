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
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "rff/signal/iq_signal.hpp"

namespace rff::spectrum {

/// Periodogram |DFT(I + jQ)|^2 / L over bins 0..L-1.
struct PsdVector {
    std::vector<double> values;
    double bin_hz = 0;
};

/// Per-bin cross-signal mean (mu) and standard deviation (v) of a PSD collection.
struct SpectrumOffsetProfile {
    std::vector<double> mu;
    std::vector<double> v;
    std::size_t n_signals = 0;
};

struct PeriodEntry {
    double amplitude = 0;     // V(f_raw)
    std::size_t f_raw = 0;    // selected bin
    std::size_t p_raw = 0;    // ceil(L / f_raw)
    std::size_t f = 0;        // refined frequency round(L / p)
    std::size_t p = 0;        // refined period, a multiple of alignment
};

struct PeriodSet {
    std::vector<PeriodEntry> entries;
    std::size_t length = 0;     // L
    std::size_t k = 0;          // requested top-k
    std::size_t alignment = 1;

    std::vector<std::size_t> periods() const;
};

PsdVector compute_psd(const signal::IQSignal& x);

/// Errors on fewer than two PSDs or mixed lengths. Accumulation is sequential
/// in the order given.
SpectrumOffsetProfile spectrum_offset(std::span<const PsdVector> psds);

/// Top-k bins of v among 1..L/2 by descending value (ties: lower bin first),
/// with p_raw = ceil(L / f). Refined fields are initialised to the raw ones.
PeriodSet select_top_k(const SpectrumOffsetProfile& profile, std::size_t k, std::size_t length);

/// Rounds each raw period to the nearest positive multiple of `alignment`
/// (ties up), drops entries whose period exceeds L, removes duplicates keeping
/// the first (largest v) occurrence and sets f = round(L / p).
PeriodSet refine_periods(const PeriodSet& raw, std::size_t alignment);

/// {L, k, alignment, entries: [{v, f_raw, p_raw, f, p}]}
nlohmann::json period_set_to_json(const PeriodSet& set);
PeriodSet period_set_from_json(const nlohmann::json& j);
void write_period_file(const std::filesystem::path& path, const PeriodSet& set);
PeriodSet read_period_file(const std::filesystem::path& path);

/// Builds a period set directly from given periods (used to inject fixed
/// resolutions); amplitudes are zero and f = round(L / p).
PeriodSet period_set_from_periods(std::span<const std::size_t> periods, std::size_t length, std::size_t alignment = 1);

}  // namespace rff::spectrum
