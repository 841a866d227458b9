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

#include "rff/signal/impairments.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rff/common/error.hpp"

namespace rff::signal {

ImpairmentProfile ImpairmentProfile::identity(int device_id) {
    ImpairmentProfile p;
    p.device_id = device_id;
    return p;
}

void ImpairmentProfile::validate() const {
    if (!(a1 > 0)) {
        throw ConfigError("impairment profile " + std::to_string(device_id) + ": a1 must be positive");
    }
    if (std::abs(cfo_hz) > 80e3) {
        throw ConfigError("impairment profile " + std::to_string(device_id) + ": |cfo_hz| exceeds 80 kHz");
    }
    if (iq_gain_imbalance < 0.9 || iq_gain_imbalance > 1.1) {
        throw ConfigError("impairment profile " + std::to_string(device_id) +
                          ": iq_gain_imbalance outside [0.9, 1.1]");
    }
}

void ImpairmentRanges::validate() const {
    if (cfo_hz_max < 0 || cfo_hz_max > 80e3) throw ConfigError("impairments.cfo_hz_max must be in [0, 80000]");
    if (iq_gain_deviation_max < 0 || iq_gain_deviation_max > 0.1)
        throw ConfigError("impairments.iq_gain_deviation_max must be in [0, 0.1]");
    if (phase_offset_max_rad < 0 || iq_phase_max_rad < 0 || dc_offset_max < 0)
        throw ConfigError("impairments: maxima must be non-negative");
    if (!(a1_min > 0) || a1_max < a1_min) throw ConfigError("impairments: need 0 < a1_min <= a1_max");
    if (a3_max < a3_min) throw ConfigError("impairments: need a3_min <= a3_max");
}

IQSignal apply_impairments(const IQSignal& x, const ImpairmentProfile& p) {
    IQSignal y = x;
    const double cos_phi = std::cos(p.iq_phase_imbalance_rad);
    const double sin_phi = std::sin(p.iq_phase_imbalance_rad);
    const double w = 2.0 * std::numbers::pi * p.cfo_hz / x.sample_rate_hz;
    for (std::size_t n = 0; n < x.samples.size(); ++n) {
        const std::complex<double> u(x.samples[n].real(), x.samples[n].imag());
        const std::complex<double> nl = p.a1 * u + p.a3 * u * std::norm(u);
        // Q arm has gain g and a phase error phi relative to I.
        const double i_arm = nl.real();
        const double q_arm = p.iq_gain_imbalance * (sin_phi * nl.real() + cos_phi * nl.imag());
        const double angle = w * static_cast<double>(n) + p.phase_offset_rad;
        const std::complex<double> rotated = std::complex<double>(i_arm, q_arm) * std::polar(1.0, angle);
        y.samples[n] = {static_cast<float>(rotated.real() + p.dc_offset_i),
                        static_cast<float>(rotated.imag() + p.dc_offset_q)};
    }
    y.device_id = p.device_id;
    return y;
}

IQSignal add_awgn(const IQSignal& x, const Snr& snr_db, Rng& rng) {
    IQSignal y = x;
    y.snr_db = snr_db;
    if (!snr_db) {
        return y;
    }
    const double noise_power = x.mean_power() / std::pow(10.0, *snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);
    for (auto& s : y.samples) {
        const double ni = sigma * rng.normal();
        const double nq = sigma * rng.normal();
        s = {static_cast<float>(s.real() + ni), static_cast<float>(s.imag() + nq)};
    }
    return y;
}

std::vector<ImpairmentProfile> sample_device_profiles(std::size_t n_devices, std::uint64_t seed,
                                                      const ImpairmentRanges& r) {
    if (n_devices < 2) {
        throw ConfigError("sample_device_profiles: need at least 2 devices");
    }
    r.validate();
    std::vector<ImpairmentProfile> profiles;
    profiles.reserve(n_devices);
    for (std::size_t d = 0; d < n_devices; ++d) {
        Rng rng(derive_seed(seed, 0x70726f66ULL, d));
        ImpairmentProfile p;
        p.device_id = static_cast<int>(d);
        p.cfo_hz = rng.uniform(-r.cfo_hz_max, r.cfo_hz_max);
        p.phase_offset_rad = rng.uniform(-r.phase_offset_max_rad, r.phase_offset_max_rad);
        p.iq_gain_imbalance = rng.uniform(1.0 - r.iq_gain_deviation_max, 1.0 + r.iq_gain_deviation_max);
        p.iq_phase_imbalance_rad = rng.uniform(-r.iq_phase_max_rad, r.iq_phase_max_rad);
        p.dc_offset_i = rng.uniform(-r.dc_offset_max, r.dc_offset_max);
        p.dc_offset_q = rng.uniform(-r.dc_offset_max, r.dc_offset_max);
        p.a1 = rng.uniform(r.a1_min, r.a1_max);
        p.a3 = rng.uniform(r.a3_min, r.a3_max);
        profiles.push_back(p);
    }
    return profiles;
}

}  // namespace rff::signal
