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

#include <span>

#include "rff/signal/dataset.hpp"
#include "rff/spectrum/spectrum.hpp"

namespace rff::spectrum {

/// Spectrum-offset period selection over every record at the given SNR:
/// PSDs -> offset profile -> top-k -> refinement.
PeriodSet analyze_records(std::span<const signal::Record> records, const signal::Snr& snr, std::size_t k,
                          std::size_t alignment);

}  // namespace rff::spectrum
