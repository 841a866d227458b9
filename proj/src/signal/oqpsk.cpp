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

#include "rff/signal/oqpsk.hpp"

#include <cmath>
#include <numbers>

namespace rff::signal {
namespace {

using ChipTable = std::array<std::array<std::uint8_t, kChipsPerSymbol>, 16>;

ChipTable make_chip_table() {
    // Symbol 0; symbols 1..7 rotate it right by 4 chips each, and symbols 8..15
    // repeat 0..7 with the odd-indexed chips inverted.
    constexpr std::array<std::uint8_t, kChipsPerSymbol> base = {1, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, 1,
                                                                0, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 1, 0};
    ChipTable table{};
    for (unsigned s = 0; s < 8; ++s) {
        for (std::size_t c = 0; c < kChipsPerSymbol; ++c) {
            table[s][(c + 4 * s) % kChipsPerSymbol] = base[c];
        }
    }
    for (unsigned s = 8; s < 16; ++s) {
        for (std::size_t c = 0; c < kChipsPerSymbol; ++c) {
            table[s][c] = (c % 2 == 1) ? static_cast<std::uint8_t>(1 - table[s - 8][c]) : table[s - 8][c];
        }
    }
    return table;
}

}  // namespace

const std::array<std::uint8_t, kChipsPerSymbol>& chip_sequence(unsigned symbol) {
    static const ChipTable table = make_chip_table();
    return table.at(symbol);
}

std::vector<std::complex<float>> oqpsk_modulate(std::span<const std::uint8_t> octets) {
    std::vector<std::uint8_t> chips;
    chips.reserve(octets.size() * 2 * kChipsPerSymbol);
    for (std::uint8_t octet : octets) {
        for (unsigned nibble : {static_cast<unsigned>(octet & 0x0F), static_cast<unsigned>(octet >> 4)}) {
            const auto& seq = chip_sequence(nibble);
            chips.insert(chips.end(), seq.begin(), seq.end());
        }
    }

    const std::size_t n = chips.size() * kSamplesPerChip;
    constexpr std::size_t pulse_len = 2 * kSamplesPerChip;
    std::array<double, pulse_len> pulse{};
    for (std::size_t s = 0; s < pulse_len; ++s) {
        pulse[s] = std::sin(std::numbers::pi * static_cast<double>(s) / static_cast<double>(pulse_len));
    }

    std::vector<double> i_branch(n, 0.0), q_branch(n, 0.0);
    for (std::size_t c = 0; c < chips.size(); ++c) {
        const double symbol = chips[c] ? 1.0 : -1.0;
        auto& branch = (c % 2 == 0) ? i_branch : q_branch;
        const std::size_t start = c * kSamplesPerChip;
        // The final Q pulse runs past the frame end and is truncated.
        for (std::size_t s = 0; s < pulse_len && start + s < n; ++s) {
            branch[start + s] += symbol * pulse[s];
        }
    }

    double power = 0;
    for (std::size_t k = 0; k < n; ++k) {
        power += i_branch[k] * i_branch[k] + q_branch[k] * q_branch[k];
    }
    const double gain = n > 0 && power > 0 ? 1.0 / std::sqrt(power / static_cast<double>(n)) : 1.0;
    std::vector<std::complex<float>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = {static_cast<float>(gain * i_branch[k]), static_cast<float>(gain * q_branch[k])};
    }
    return out;
}

IQSignal oqpsk_modulate(const FrameBytes& frame) {
    IQSignal sig;
    sig.samples = oqpsk_modulate(std::span<const std::uint8_t>(frame.bytes));
    return sig;
}

}  // namespace rff::signal
