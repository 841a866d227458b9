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

#include "rff/signal/iq_signal.hpp"

#include <algorithm>
#include <cctype>

#include "rff/common/error.hpp"

namespace rff::signal {

std::string to_string(DatasetKind kind) { return kind == DatasetKind::cdr ? "CDR" : "RDR"; }

DatasetKind parse_dataset_kind(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "CDR") return DatasetKind::cdr;
    if (upper == "RDR") return DatasetKind::rdr;
    throw ConfigError("unknown dataset kind '" + std::string(text) + "' (expected CDR or RDR)");
}

std::size_t default_window_length(DatasetKind kind) { return kind == DatasetKind::cdr ? 1024 : 2048; }

std::string snr_to_string(const Snr& snr) { return snr ? std::to_string(*snr) : std::string("clean"); }

double IQSignal::mean_power() const {
    if (samples.empty()) {
        return 0.0;
    }
    double acc = 0;
    for (const auto& s : samples) {
        acc += static_cast<double>(std::norm(s));
    }
    return acc / static_cast<double>(samples.size());
}

}  // namespace rff::signal
