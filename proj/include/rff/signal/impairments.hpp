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
#include <vector>

#include "rff/common/rng.hpp"
#include "rff/signal/iq_signal.hpp"

namespace rff::signal {

/// Per-device transmitter distortions: the ground-truth fingerprint.
struct ImpairmentProfile {
    int device_id = 0;
    double cfo_hz = 0;
    double phase_offset_rad = 0;
    double iq_gain_imbalance = 1;
    double iq_phase_imbalance_rad = 0;
    double dc_offset_i = 0;
    double dc_offset_q = 0;
    double a1 = 1;  // linear gain
    double a3 = 0;  // cubic term of the memoryless nonlinearity

    static ImpairmentProfile identity(int device_id = 0);
    /// Throws ConfigError if a1 <= 0, |cfo| > 80 kHz or the gain imbalance is outside [0.9, 1.1].
    void validate() const;
};

/// Sampling ranges for synthetic device profiles. Every field is drawn
/// uniformly from [-max, max] or [lo, hi].
struct ImpairmentRanges {
    double cfo_hz_max = 80e3;
    double phase_offset_max_rad = 3.14159265358979323846;
    double iq_gain_deviation_max = 0.08;
    double iq_phase_max_rad = 0.15;
    double dc_offset_max = 0.1;
    double a1_min = 0.85;
    double a1_max = 1.15;
    double a3_min = -0.12;
    double a3_max = 0.0;

    void validate() const;
};

/// Applies, in order: a1*u + a3*u|u|^2, IQ gain/phase imbalance, CFO rotation
/// exp(j 2 pi cfo n / fs), phase offset, DC offset. Sample 0 is t = 0.
IQSignal apply_impairments(const IQSignal& x, const ImpairmentProfile& profile);

/// Complex AWGN scaled to the measured mean power of x. nullopt returns x unchanged.
IQSignal add_awgn(const IQSignal& x, const Snr& snr_db, Rng& rng);

/// One profile per device; profile i depends only on (seed, i).
std::vector<ImpairmentProfile> sample_device_profiles(std::size_t n_devices, std::uint64_t seed,
                                                      const ImpairmentRanges& ranges = {});

}  // namespace rff::signal
