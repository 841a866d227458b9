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

#include "rff/spectrum/analysis.hpp"

#include "rff/common/error.hpp"

namespace rff::spectrum {

PeriodSet analyze_records(std::span<const signal::Record> records, const signal::Snr& snr, std::size_t k,
                          std::size_t alignment) {
    std::vector<PsdVector> psds;
    for (const auto& r : records) {
        if (r.signal.snr_db == snr) psds.push_back(compute_psd(r.signal));
    }
    if (psds.size() < 2) {
        throw ConfigError("analyze: fewer than 2 records at SNR " + signal::snr_to_string(snr));
    }
    const std::size_t length = psds.front().values.size();
    const auto profile = spectrum_offset(psds);
    return refine_periods(select_top_k(profile, k, length), alignment);
}

}  // namespace rff::spectrum
