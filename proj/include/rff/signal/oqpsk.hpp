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

#include <array>
#include <cstdint>
#include <span>

#include "rff/signal/frame.hpp"
#include "rff/signal/iq_signal.hpp"

namespace rff::signal {

/// 32-chip spreading sequence for a 4-bit data symbol (chip 0 first).
const std::array<std::uint8_t, kChipsPerSymbol>& chip_sequence(unsigned symbol);

/// Spreads octets (low nibble first) and O-QPSK modulates them with half-sine
/// pulses at 4 samples per chip: even chips on I, odd chips on Q, Q lagging I
/// by one chip. Output length is 256 samples per octet, scaled to unit mean
/// power.
std::vector<std::complex<float>> oqpsk_modulate(std::span<const std::uint8_t> octets);

/// Modulates a whole frame (clean, ideal transmitter).
IQSignal oqpsk_modulate(const FrameBytes& frame);

}  // namespace rff::signal
