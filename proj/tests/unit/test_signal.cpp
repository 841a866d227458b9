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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rff/common/error.hpp"
#include "rff/common/fft.hpp"
#include "rff/signal/dataset.hpp"
#include "rff/signal/frame.hpp"
#include "rff/signal/impairments.hpp"
#include "rff/signal/oqpsk.hpp"

#include "test_util.hpp"

using namespace rff;
using namespace rff::signal;
namespace fs = std::filesystem;

namespace {

double measured_snr_db(const IQSignal& clean, const IQSignal& noisy) {
    double ps = 0, pn = 0;
    for (std::size_t i = 0; i < clean.length(); ++i) {
        ps += std::norm(clean.samples[i]);
        pn += std::norm(std::complex<double>(noisy.samples[i]) - std::complex<double>(clean.samples[i]));
    }
    return 10 * std::log10(ps / pn);
}

IQSignal random_clean(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const FrameBytes f = build_frame(DatasetKind::rdr, rng);
    IQSignal full = oqpsk_modulate(f);
    full.samples.resize(std::min(n, full.samples.size()));
    while (full.samples.size() < n) {
        const FrameBytes g = build_frame(DatasetKind::rdr, rng);
        const IQSignal more = oqpsk_modulate(g);
        full.samples.insert(full.samples.end(), more.samples.begin(), more.samples.end());
    }
    full.samples.resize(n);
    return full;
}

}  // namespace

TEST_CASE("frame layout") {
    Rng rng(1);
    const FrameBytes f = build_frame(DatasetKind::cdr, rng);
    CHECK(f.bytes.size() == 75);
    CHECK(kPreambleOctets + kSfdOctets + kPhrOctets + kMacHeaderOctets + kMacPayloadOctets + kMacFooterOctets == 75);
    for (std::size_t i = 0; i < 4; ++i) CHECK(f.bytes[i] == 0);
    CHECK(f.bytes[kSfdOffset] == 0xA7);
    CHECK(f.bytes[kPhrOffset] == kMacHeaderOctets + kMacPayloadOctets + kMacFooterOctets);
    const std::span<const std::uint8_t> covered(f.bytes.data() + kMacHeaderOffset, kMacHeaderOctets + kMacPayloadOctets);
    const std::uint16_t fcs = fcs16(covered);
    CHECK(f.bytes[kMacFooterOffset] == (fcs & 0xff));
    CHECK(f.bytes[kMacFooterOffset + 1] == (fcs >> 8));
}

TEST_CASE("fcs is CRC-16/KERMIT") {
    const std::string check = "123456789";
    const std::vector<std::uint8_t> bytes(check.begin(), check.end());
    CHECK(fcs16(bytes) == 0x2189);
}

TEST_CASE("CDR frames are constant, RDR payloads are random") {
    Rng a(1), b(2);
    const auto c1 = build_frame(DatasetKind::cdr, a), c2 = build_frame(DatasetKind::cdr, b);
    CHECK(c1.bytes == c2.bytes);
    const auto r1 = build_frame(DatasetKind::rdr, a), r2 = build_frame(DatasetKind::rdr, b);
    CHECK(std::equal(r1.bytes.begin(), r1.bytes.begin() + kMacPayloadOffset, r2.bytes.begin()));
    CHECK_FALSE(std::equal(r1.bytes.begin() + kMacPayloadOffset, r1.bytes.begin() + kMacFooterOffset,
                           r2.bytes.begin() + kMacPayloadOffset));
}

TEST_CASE("chip table") {
    // Symbol 0 of the 2.4 GHz O-QPSK PHY, chip c0 first.
    const std::string s0 = "11011001110000110101001000101110";
    const auto& c0 = chip_sequence(0);
    for (std::size_t i = 0; i < 32; ++i) CHECK(c0[i] == s0[i] - '0');
    // Symbols 1..7 are right rotations by 4k chips; 8..15 invert the odd chips of 0..7.
    for (unsigned k = 1; k < 8; ++k) {
        const auto& ck = chip_sequence(k);
        for (std::size_t i = 0; i < 32; ++i) CHECK(ck[(i + 4 * k) % 32] == c0[i]);
    }
    for (unsigned k = 0; k < 8; ++k) {
        const auto& lo = chip_sequence(k);
        const auto& hi = chip_sequence(k + 8);
        for (std::size_t i = 0; i < 32; ++i) CHECK(hi[i] == (i % 2 ? 1 - lo[i] : lo[i]));
    }
    std::set<std::array<std::uint8_t, 32>> distinct;
    for (unsigned k = 0; k < 16; ++k) distinct.insert(chip_sequence(k));
    CHECK(distinct.size() == 16);
    CHECK_THROWS(chip_sequence(16));
}

TEST_CASE("oqpsk rate arithmetic and envelope") {
    const std::vector<std::uint8_t> one{0x5a};
    CHECK(oqpsk_modulate(one).size() == 256);
    const std::vector<std::uint8_t> pair{0x12, 0x34};
    CHECK(oqpsk_modulate(pair).size() == 512);

    Rng rng(3);
    const IQSignal s = oqpsk_modulate(build_frame(DatasetKind::rdr, rng));
    CHECK(s.length() == 75 * 256);
    CHECK(s.mean_power() == doctest::Approx(1.0).epsilon(1e-6));
    double lo = 1e9, hi = 0;
    for (std::size_t i = 8; i + 8 < s.length(); ++i) {
        lo = std::min(lo, double(std::abs(s.samples[i])));
        hi = std::max(hi, double(std::abs(s.samples[i])));
    }
    CHECK(hi / lo == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("oqpsk all-zero octets match the golden waveform") {
    const std::vector<std::uint8_t> zeros(2, 0);
    const auto w = oqpsk_modulate(zeros);
    std::ifstream is(test_data_path("oqpsk_zero_octets.csv"));
    REQUIRE(is);
    std::string line;
    std::size_t i = 0;
    while (std::getline(is, line)) {
        REQUIRE(i < w.size());
        const auto comma = line.find(',');
        CHECK(w[i].real() == doctest::Approx(std::stod(line.substr(0, comma))).epsilon(1e-6));
        CHECK(w[i].imag() == doctest::Approx(std::stod(line.substr(comma + 1))).epsilon(1e-6));
        ++i;
    }
    CHECK(i == w.size());
}

TEST_CASE("impairments: identity, phase flip, CFO shift theorem") {
    const IQSignal x = random_clean(1024, 5);
    const IQSignal same = apply_impairments(x, ImpairmentProfile::identity());
    CHECK(same.samples == x.samples);

    ImpairmentProfile flip = ImpairmentProfile::identity();
    flip.phase_offset_rad = std::numbers::pi;
    const IQSignal neg = apply_impairments(x, flip);
    for (std::size_t i = 0; i < x.length(); ++i) {
        CHECK(neg.samples[i].real() == doctest::Approx(-x.samples[i].real()).epsilon(1e-5));
        CHECK(neg.samples[i].imag() == doctest::Approx(-x.samples[i].imag()).epsilon(1e-5));
    }

    // A tone at bin 10 moves by exactly m bins under an integer-bin CFO.
    const std::size_t n = 1024;
    IQSignal tone;
    for (std::size_t t = 0; t < n; ++t) tone.samples.push_back(std::polar(1.0f, float(2 * std::numbers::pi * 10 * t / n)));
    for (const int m : {1, 7, -3}) {
        ImpairmentProfile p = ImpairmentProfile::identity();
        p.cfo_hz = kSampleRateHz / n * m;
        const IQSignal shifted = apply_impairments(tone, p);
        std::vector<std::complex<double>> buf(shifted.samples.begin(), shifted.samples.end());
        const auto spec = dsp::fft(buf);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(spec[i]) > std::abs(spec[arg])) arg = i;
        CHECK(arg == static_cast<std::size_t>((10 + m + static_cast<int>(n)) % static_cast<int>(n)));
    }
}

TEST_CASE("profile validation") {
    ImpairmentProfile p = ImpairmentProfile::identity();
    p.a1 = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ImpairmentProfile::identity();
    p.cfo_hz = 90e3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ImpairmentProfile::identity();
    p.iq_gain_imbalance = 1.2;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("awgn calibration") {
    SUBCASE("clean is identity") {
        const IQSignal x = random_clean(256, 1);
        Rng rng(1);
        CHECK(add_awgn(x, std::nullopt, rng).samples == x.samples);
    }
    SUBCASE("0 dB over 10k samples") {
        const IQSignal x = random_clean(10000, 2);
        Rng rng(2);
        CHECK(std::abs(measured_snr_db(x, add_awgn(x, 0, rng))) < 0.3);
    }
    SUBCASE("20 dB vs -20 dB variance ratio") {
        const IQSignal x = random_clean(20000, 3);
        Rng r1(3), r2(4);
        const IQSignal hi = add_awgn(x, 20, r1), lo = add_awgn(x, -20, r2);
        double vh = 0, vl = 0;
        for (std::size_t i = 0; i < x.length(); ++i) {
            vh += std::norm(std::complex<double>(hi.samples[i]) - std::complex<double>(x.samples[i]));
            vl += std::norm(std::complex<double>(lo.samples[i]) - std::complex<double>(x.samples[i]));
        }
        CHECK(vl / vh == doctest::Approx(1e4).epsilon(0.05));
    }
    SUBCASE("sweep at L = 2048 stays within 0.3 dB") {
        const IQSignal x = random_clean(2048, 4);
        for (int snr = -20; snr <= 20; snr += 2) {
            Rng rng(derive_seed(11, static_cast<std::uint64_t>(snr + 100)));
            CHECK(std::abs(measured_snr_db(x, add_awgn(x, snr, rng)) - snr) < 0.3);
        }
    }
}

TEST_CASE("device profiles") {
    const auto a = sample_device_profiles(32, 42), b = sample_device_profiles(32, 42);
    REQUIRE(a.size() == 32);
    std::set<double> cfos;
    for (std::size_t i = 0; i < 32; ++i) {
        CHECK(a[i].device_id == static_cast<int>(i));
        CHECK(a[i].cfo_hz == b[i].cfo_hz);
        CHECK(a[i].a3 == b[i].a3);
        CHECK_NOTHROW(a[i].validate());
        cfos.insert(a[i].cfo_hz);
    }
    CHECK(cfos.size() == 32);
    // Profile i depends only on (seed, i).
    CHECK(sample_device_profiles(4, 42)[3].cfo_hz == a[3].cfo_hz);
    for (std::size_t i = 1; i < 32; ++i) {
        CHECK(a[i].phase_offset_rad != a[0].phase_offset_rad);
        CHECK(a[i].iq_gain_imbalance != a[0].iq_gain_imbalance);
        CHECK(a[i].dc_offset_i != a[0].dc_offset_i);
    }
    CHECK_THROWS_AS(sample_device_profiles(1, 42), ConfigError);
}

TEST_CASE("profile 0 with seed 42 matches the golden record") {
    std::ifstream is(test_data_path("profile0_seed42.json"));
    REQUIRE(is);
    const auto j = nlohmann::json::parse(is);
    const auto p = sample_device_profiles(2, 42)[0];
    CHECK(p.device_id == j.at("device_id").get<int>());
    CHECK(p.cfo_hz == doctest::Approx(j.at("cfo_hz").get<double>()).epsilon(1e-12));
    CHECK(p.phase_offset_rad == doctest::Approx(j.at("phase_offset_rad").get<double>()).epsilon(1e-12));
    CHECK(p.iq_gain_imbalance == doctest::Approx(j.at("iq_gain_imbalance").get<double>()).epsilon(1e-12));
    CHECK(p.iq_phase_imbalance_rad == doctest::Approx(j.at("iq_phase_imbalance_rad").get<double>()).epsilon(1e-12));
    CHECK(p.dc_offset_i == doctest::Approx(j.at("dc_offset_i").get<double>()).epsilon(1e-12));
    CHECK(p.dc_offset_q == doctest::Approx(j.at("dc_offset_q").get<double>()).epsilon(1e-12));
    CHECK(p.a1 == doctest::Approx(j.at("a1").get<double>()).epsilon(1e-12));
    CHECK(p.a3 == doctest::Approx(j.at("a3").get<double>()).epsilon(1e-12));
}

TEST_CASE("windows: CDR clean windows repeat per device") {
    DatasetSpec spec;
    spec.kind = DatasetKind::cdr;
    const auto profile = sample_device_profiles(2, 42)[1];
    const IQSignal w0 = synthesize_clean_window(spec, profile, 3);
    const IQSignal w1 = synthesize_clean_window(spec, profile, 17);
    CHECK(w0.length() == 1024);
    CHECK(w0.samples == w1.samples);
    spec.kind = DatasetKind::rdr;
    const IQSignal r0 = synthesize_clean_window(spec, profile, 3);
    const IQSignal r1 = synthesize_clean_window(spec, profile, 17);
    CHECK(r0.length() == 2048);
    CHECK(r0.samples != r1.samples);
}

TEST_CASE("dataset counts, determinism and round trip") {
    TempDir tmp("dataset");
    DatasetSpec spec;
    spec.n_devices = 32;
    spec.records_per_device_per_snr = 10;
    spec.window_length = 64;
    spec.records_per_shard = 2000;
    CHECK(spec.total_records() == 6720);
    const auto m = generate_dataset(spec, tmp.path / "a");
    CHECK(m.train_count == 6048);
    CHECK(m.test_count == 672);
    CHECK(m.train_shards.size() == 4);
    generate_dataset(spec, tmp.path / "b");
    for (const auto& name : m.train_shards) CHECK(read_file(tmp.path / "a" / name) == read_file(tmp.path / "b" / name));
    CHECK(read_file(tmp.path / "a" / "manifest.json") == read_file(tmp.path / "b" / "manifest.json"));

    const Dataset train = load_dataset(tmp.path / "a", "train");
    const Dataset test = load_dataset(tmp.path / "a", "test");
    CHECK(train.size() == 6048);
    CHECK(test.size() == 672);
    // Every (device, SNR) cell is populated in both splits.
    std::set<std::pair<int, int>> cells_train, cells_test;
    for (const auto& r : train.records()) cells_train.insert({r.label, *r.signal.snr_db});
    for (const auto& r : test.records()) cells_test.insert({r.label, *r.signal.snr_db});
    CHECK(cells_train.size() == 32 * 21);
    CHECK(cells_test.size() == 32 * 21);
    for (const auto& r : train.records()) CHECK(r.signal.length() == 64);

    const auto batches = train.batches(1, 512);
    CHECK(batches.size() == 12);
    CHECK(batches.back().size() == 6048 - 11 * 512);
    CHECK(train.shuffled_order(3) == train.shuffled_order(3));
    CHECK(train.shuffled_order(3) != train.shuffled_order(4));
    CHECK_THROWS_AS(load_dataset(tmp.path / "a", "validation"), ConfigError);
}

TEST_CASE("default RDR windows are 2048 samples") {
    TempDir tmp("rdr");
    DatasetSpec spec;
    spec.n_devices = 2;
    spec.records_per_device_per_snr = 1;
    spec.snr_list = {20, std::nullopt};
    generate_dataset(spec, tmp.path);
    const auto train = load_dataset(tmp.path, "train");
    const auto test = load_dataset(tmp.path, "test");
    CHECK(train.size() + test.size() == 4);
    for (const auto& r : train.records()) CHECK(r.signal.length() == 2048);
    const auto m = read_manifest(tmp.path);
    CHECK(m.window_length == 2048);
    CHECK(m.raw.at("profiles").size() == 2);
}

TEST_CASE("shard round trip and corruption") {
    TempDir tmp("shard");
    std::vector<Record> records(3);
    Rng rng(1);
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i].label = static_cast<int>(i);
        records[i].signal.snr_db = i == 2 ? Snr{} : Snr{static_cast<int>(i) * 4 - 2};
        for (int t = 0; t < 16; ++t) {
            records[i].signal.samples.emplace_back(float(rng.normal()), float(rng.normal()));
        }
    }
    const auto path = tmp.path / "x.rffd";
    write_shard(path, records, 16);
    const auto back = read_shard(path, 16);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].label == records[i].label);
        CHECK(back[i].signal.snr_db == records[i].signal.snr_db);
        CHECK(back[i].signal.samples == records[i].signal.samples);
    }
    CHECK_THROWS_AS(read_shard(path, 32), FormatError);

    const std::string bytes = read_file(path);
    write_file(tmp.path / "short.rffd", bytes.substr(0, bytes.size() - 5));
    try {
        read_shard(tmp.path / "short.rffd", 16);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.offset() > 14);
        CHECK(e.offset() < bytes.size());
    }
    std::string bad = bytes;
    bad[0] = 'X';
    write_file(tmp.path / "bad.rffd", bad);
    try {
        read_shard(tmp.path / "bad.rffd", 16);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 0);
    }
}

TEST_CASE("dataset spec validation") {
    DatasetSpec s;
    s.n_devices = 1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.snr_list.clear();
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.window_length = 100000;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK(parse_dataset_kind("cdr") == DatasetKind::cdr);
    CHECK_THROWS_AS(parse_dataset_kind("xyz"), ConfigError);
}
