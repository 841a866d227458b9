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

#include "rff/common/rng.hpp"
#include "rff/signal/iq_signal.hpp"

namespace rff::signal {

// IEEE 802.15.4 PPDU layout used for both datasets (octets).
inline constexpr std::size_t kPreambleOctets = 4;
inline constexpr std::size_t kSfdOctets = 1;
inline constexpr std::size_t kPhrOctets = 1;
inline constexpr std::size_t kMacHeaderOctets = 13;
inline constexpr std::size_t kMacPayloadOctets = 54;
inline constexpr std::size_t kMacFooterOctets = 2;
inline constexpr std::size_t kFrameOctets =
    kPreambleOctets + kSfdOctets + kPhrOctets + kMacHeaderOctets + kMacPayloadOctets + kMacFooterOctets;

inline constexpr std::size_t kSfdOffset = kPreambleOctets;
inline constexpr std::size_t kPhrOffset = kSfdOffset + kSfdOctets;
inline constexpr std::size_t kMacHeaderOffset = kPhrOffset + kPhrOctets;
inline constexpr std::size_t kMacPayloadOffset = kMacHeaderOffset + kMacHeaderOctets;
inline constexpr std::size_t kMacFooterOffset = kMacPayloadOffset + kMacPayloadOctets;

inline constexpr std::uint8_t kSfd = 0xA7;

struct FrameBytes {
    DatasetKind kind = DatasetKind::rdr;
    std::array<std::uint8_t, kFrameOctets> bytes{};
};

/// Builds one PPDU. Preamble, SFD, PHR and MAC header are fixed. The MAC
/// payload is constant for CDR frames and uniformly random for RDR frames.
/// The footer is the 802.15.4 FCS (CRC-16/KERMIT) over header and payload.
FrameBytes build_frame(DatasetKind kind, Rng& rng);

/// CRC-16 with polynomial x^16 + x^12 + x^5 + 1, reflected, zero init.
std::uint16_t fcs16(std::span<const std::uint8_t> data);

}  // namespace rff::signal
