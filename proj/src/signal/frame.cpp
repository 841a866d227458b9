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

#include "rff/signal/frame.hpp"

#include <algorithm>

namespace rff::signal {
namespace {

// Data frame, PAN ID compression, short addressing; sequence number and
// addresses are fixed so the CDR region never varies between records.
constexpr std::array<std::uint8_t, kMacHeaderOctets> kMacHeader = {
    0x41, 0x88, 0x5A, 0x34, 0x12, 0xFF, 0xFF, 0x01, 0x00, 0x00, 0x00, 0x00, 0x00};

}  // namespace

std::uint16_t fcs16(std::span<const std::uint8_t> data) {
    std::uint16_t crc = 0;
    for (std::uint8_t byte : data) {
        crc ^= byte;
        for (int bit = 0; bit < 8; ++bit) {
            crc = (crc & 1) ? static_cast<std::uint16_t>((crc >> 1) ^ 0x8408) : static_cast<std::uint16_t>(crc >> 1);
        }
    }
    return crc;
}

FrameBytes build_frame(DatasetKind kind, Rng& rng) {
    FrameBytes frame;
    frame.kind = kind;
    auto& b = frame.bytes;
    std::fill_n(b.begin(), kPreambleOctets, std::uint8_t{0x00});
    b[kSfdOffset] = kSfd;
    b[kPhrOffset] = static_cast<std::uint8_t>(kMacHeaderOctets + kMacPayloadOctets + kMacFooterOctets);
    std::copy(kMacHeader.begin(), kMacHeader.end(), b.begin() + kMacHeaderOffset);
    for (std::size_t i = 0; i < kMacPayloadOctets; ++i) {
        b[kMacPayloadOffset + i] = kind == DatasetKind::rdr ? static_cast<std::uint8_t>(rng.next_u64() & 0xFF)
                                                            : static_cast<std::uint8_t>(i);
    }
    const std::uint16_t fcs =
        fcs16(std::span<const std::uint8_t>(b.data() + kMacHeaderOffset, kMacHeaderOctets + kMacPayloadOctets));
    b[kMacFooterOffset] = static_cast<std::uint8_t>(fcs & 0xFF);
    b[kMacFooterOffset + 1] = static_cast<std::uint8_t>(fcs >> 8);
    return frame;
}

}  // namespace rff::signal
