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

#include "rff/signal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "rff/common/byteio.hpp"
#include "rff/common/error.hpp"
#include "rff/signal/frame.hpp"
#include "rff/signal/oqpsk.hpp"

namespace rff::signal {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kShardMagic[4] = {'R', 'F', 'F', 'D'};
constexpr std::uint64_t kFrameStream = 1;
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

std::size_t frame_samples() { return kFrameOctets * kSamplesPerOctet; }

std::size_t window_start_base(DatasetKind kind) {
    return kind == DatasetKind::cdr ? 0 : kMacPayloadOffset * kSamplesPerOctet;
}

std::string shard_name(std::string_view split, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-%05zu.rffd", i);
    return std::string(split) + buf;
}

std::int16_t encode_snr(const Snr& snr) {
    return snr ? static_cast<std::int16_t>(*snr) : kCleanSnrCode;
}

Snr decode_snr(std::int16_t code) {
    return code == kCleanSnrCode ? Snr{} : Snr{static_cast<int>(code)};
}

void write_shard_header(std::ostream& os, std::uint32_t count, std::uint32_t length) {
    os.write(kShardMagic, 4);
    byteio::write_le<std::uint16_t>(os, kShardVersion);
    byteio::write_le<std::uint32_t>(os, count);
    byteio::write_le<std::uint32_t>(os, length);
}

void write_record(std::ostream& os, const Record& r) {
    byteio::write_le<std::uint16_t>(os, static_cast<std::uint16_t>(r.label));
    byteio::write_le<std::int16_t>(os, encode_snr(r.signal.snr_db));
    for (const auto& s : r.signal.samples) {
        byteio::write_le<float>(os, s.real());
        byteio::write_le<float>(os, s.imag());
    }
}

json ranges_to_json(const ImpairmentRanges& r) {
    return {{"cfo_hz_max", r.cfo_hz_max},
            {"phase_offset_max_rad", r.phase_offset_max_rad},
            {"iq_gain_deviation_max", r.iq_gain_deviation_max},
            {"iq_phase_max_rad", r.iq_phase_max_rad},
            {"dc_offset_max", r.dc_offset_max},
            {"a1_min", r.a1_min},
            {"a1_max", r.a1_max},
            {"a3_min", r.a3_min},
            {"a3_max", r.a3_max}};
}

json profile_to_json(const ImpairmentProfile& p) {
    return {{"device_id", p.device_id},
            {"cfo_hz", p.cfo_hz},
            {"phase_offset_rad", p.phase_offset_rad},
            {"iq_gain_imbalance", p.iq_gain_imbalance},
            {"iq_phase_imbalance_rad", p.iq_phase_imbalance_rad},
            {"dc_offset_i", p.dc_offset_i},
            {"dc_offset_q", p.dc_offset_q},
            {"a1", p.a1},
            {"a3", p.a3}};
}

/// Removes every registered file unless release() is called.
class FileCleanup {
public:
    ~FileCleanup() {
        if (armed_) {
            std::error_code ec;
            for (const auto& p : files_) fs::remove(p, ec);
        }
    }
    void add(const fs::path& p) { files_.push_back(p); }
    void release() { armed_ = false; }

private:
    std::vector<fs::path> files_;
    bool armed_ = true;
};

}  // namespace

std::vector<Snr> default_snr_list() {
    std::vector<Snr> list;
    for (int s = -20; s <= 20; s += 2) list.emplace_back(s);
    return list;
}

std::size_t DatasetSpec::effective_window_length() const {
    return window_length ? window_length : default_window_length(kind);
}

void DatasetSpec::validate() const {
    if (n_devices < 2 || n_devices > 65535) throw ConfigError("dataset.n_devices must be in [2, 65535]");
    if (records_per_device_per_snr == 0) throw ConfigError("dataset.records_per_device_per_snr must be >= 1");
    if (snr_list.empty()) throw ConfigError("dataset.snr_list must not be empty");
    for (const auto& s : snr_list) {
        if (s && (*s < -100 || *s > 100)) throw ConfigError("dataset.snr_list: SNR out of range [-100, 100]");
    }
    if (test_fraction < 0 || test_fraction >= 1) throw ConfigError("dataset.test_fraction must be in [0, 1)");
    if (records_per_shard == 0) throw ConfigError("dataset.records_per_shard must be >= 1");
    const std::size_t length = effective_window_length();
    const std::size_t available = kind == DatasetKind::cdr
                                      ? frame_samples()
                                      : kMacPayloadOctets * kSamplesPerOctet - kMaxWindowJitter;
    if (length < 2 || length > available) {
        throw ConfigError("dataset.window_length " + std::to_string(length) + " must be in [2, " +
                          std::to_string(available) + "] for " + to_string(kind));
    }
    impairments.validate();
}

IQSignal synthesize_clean_window(const DatasetSpec& spec, const ImpairmentProfile& profile, std::uint64_t index) {
    Rng rng(derive_seed(spec.seed, index, kFrameStream));
    const FrameBytes frame = build_frame(spec.kind, rng);
    const IQSignal impaired = apply_impairments(oqpsk_modulate(frame), profile);
    const std::size_t length = spec.effective_window_length();
    std::size_t start = window_start_base(spec.kind);
    if (spec.kind == DatasetKind::rdr) {
        start += static_cast<std::size_t>(rng.below(kMaxWindowJitter + 1));
    }
    IQSignal window;
    window.device_id = profile.device_id;
    window.samples.assign(impaired.samples.begin() + static_cast<std::ptrdiff_t>(start),
                          impaired.samples.begin() + static_cast<std::ptrdiff_t>(start + length));
    return window;
}

IQSignal synthesize_record(const DatasetSpec& spec, const ImpairmentProfile& profile, const Snr& snr,
                           std::uint64_t index) {
    Rng noise_rng(derive_seed(spec.seed, index, kFrameStream + 1));
    return add_awgn(synthesize_clean_window(spec, profile, index), snr, noise_rng);
}

DatasetManifest generate_dataset(const DatasetSpec& spec, const fs::path& out_dir) {
    spec.validate();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    const auto profiles = sample_device_profiles(spec.n_devices, spec.seed, spec.impairments);
    const std::size_t n_snr = spec.snr_list.size();
    const std::size_t per_cell = spec.records_per_device_per_snr;
    const std::size_t n_test_cell =
        static_cast<std::size_t>(std::llround(static_cast<double>(per_cell) * spec.test_fraction));

    // Stratified split: within every (device, SNR) cell a seeded shuffle picks the test records.
    std::vector<bool> is_test(spec.total_records(), false);
    for (std::size_t cell = 0; cell < spec.n_devices * n_snr; ++cell) {
        std::vector<std::size_t> reps(per_cell);
        std::iota(reps.begin(), reps.end(), std::size_t{0});
        Rng rng(derive_seed(spec.seed, kSplitStream, cell));
        for (std::size_t i = per_cell; i > 1; --i) std::swap(reps[i - 1], reps[rng.below(i)]);
        for (std::size_t t = 0; t < n_test_cell; ++t) is_test[cell * per_cell + reps[t]] = true;
    }
    const std::size_t test_total = n_test_cell * spec.n_devices * n_snr;
    const std::size_t train_total = spec.total_records() - test_total;
    const std::size_t length = spec.effective_window_length();

    FileCleanup cleanup;
    struct SplitWriter {
        std::string split;
        std::size_t total = 0;
        std::size_t written = 0;
        std::vector<std::string> names;
        std::ofstream os;
    };
    SplitWriter writers[2] = {{"train", train_total, 0, {}, {}}, {"test", test_total, 0, {}, {}}};

    auto append = [&](SplitWriter& w, const Record& rec) {
        if (w.written % spec.records_per_shard == 0) {
            if (w.os.is_open()) {
                w.os.close();
                if (!w.os) throw IoError("write failed for shard " + w.names.back());
            }
            const std::string name = shard_name(w.split, w.names.size());
            const fs::path path = out_dir / name;
            cleanup.add(path);
            w.os.open(path, std::ios::binary | std::ios::trunc);
            if (!w.os) throw IoError("cannot open " + path.string() + " for writing");
            w.names.push_back(name);
            const std::size_t count = std::min(spec.records_per_shard, w.total - w.written);
            write_shard_header(w.os, static_cast<std::uint32_t>(count), static_cast<std::uint32_t>(length));
        }
        write_record(w.os, rec);
        if (!w.os) throw IoError("write failed for shard " + w.names.back());
        ++w.written;
    };

    std::uint64_t index = 0;
    for (std::size_t dev = 0; dev < spec.n_devices; ++dev) {
        for (std::size_t si = 0; si < n_snr; ++si) {
            for (std::size_t rep = 0; rep < per_cell; ++rep, ++index) {
                Record rec{synthesize_record(spec, profiles[dev], spec.snr_list[si], index), static_cast<int>(dev)};
                append(writers[is_test[index] ? 1 : 0], rec);
            }
        }
    }
    for (auto& w : writers) {
        if (w.os.is_open()) {
            w.os.close();
            if (!w.os) throw IoError("write failed for shard " + w.names.back());
        }
    }

    json manifest = {
        {"version", kManifestVersion},
        {"kind", to_string(spec.kind)},
        {"n_devices", spec.n_devices},
        {"records_per_device_per_snr", per_cell},
        {"snr_list", snr_list_to_json(spec.snr_list)},
        {"window_length", length},
        {"sample_rate_hz", kSampleRateHz},
        {"carrier_hz", kCarrierHz},
        {"test_fraction", spec.test_fraction},
        {"counts", {{"train", train_total}, {"test", test_total}}},
        {"shards", {{"train", writers[0].names}, {"test", writers[1].names}}},
        {"seed", spec.seed},
        {"impairment_ranges", ranges_to_json(spec.impairments)},
        {"profiles", json::array()},
    };
    for (const auto& p : profiles) manifest["profiles"].push_back(profile_to_json(p));

    const fs::path manifest_path = out_dir / "manifest.json";
    cleanup.add(manifest_path);
    {
        std::ofstream os(manifest_path, std::ios::trunc);
        os << manifest.dump(2) << '\n';
        if (!os) throw IoError("cannot write " + manifest_path.string());
    }
    cleanup.release();
    return read_manifest(out_dir);
}

json snr_list_to_json(const std::vector<Snr>& list) {
    json arr = json::array();
    for (const auto& s : list) {
        if (s) arr.push_back(*s);
        else arr.push_back("clean");
    }
    return arr;
}

std::vector<Snr> snr_list_from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("snr_list must be an array");
    std::vector<Snr> out;
    for (const auto& v : j) {
        if (v.is_number_integer()) out.emplace_back(v.get<int>());
        else if (v.is_string() && v.get<std::string>() == "clean") out.emplace_back(std::nullopt);
        else throw ConfigError("snr_list entries must be integers or \"clean\"");
    }
    return out;
}

DatasetManifest read_manifest(const fs::path& dir) {
    const fs::path path = dir / "manifest.json";
    std::ifstream is(path);
    if (!is) throw IoError("missing manifest " + path.string());
    DatasetManifest m;
    try {
        is >> m.raw;
        m.version = m.raw.at("version").get<int>();
        if (m.version != kManifestVersion) {
            throw FormatError("unsupported manifest version " + std::to_string(m.version), 0);
        }
        m.kind = parse_dataset_kind(m.raw.at("kind").get<std::string>());
        m.n_devices = m.raw.at("n_devices").get<std::size_t>();
        m.window_length = m.raw.at("window_length").get<std::size_t>();
        m.snr_list = snr_list_from_json(m.raw.at("snr_list"));
        m.seed = m.raw.at("seed").get<std::uint64_t>();
        m.train_count = m.raw.at("counts").at("train").get<std::size_t>();
        m.test_count = m.raw.at("counts").at("test").get<std::size_t>();
        m.train_shards = m.raw.at("shards").at("train").get<std::vector<std::string>>();
        m.test_shards = m.raw.at("shards").at("test").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest " + path.string() + ": " + e.what(), 0);
    }
    return m;
}

void write_shard(const fs::path& path, std::span<const Record> records, std::size_t length) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_shard_header(os, static_cast<std::uint32_t>(records.size()), static_cast<std::uint32_t>(length));
    for (const auto& r : records) {
        if (r.signal.length() != length) {
            throw DimensionError("write_shard: record length " + std::to_string(r.signal.length()) +
                                 " != " + std::to_string(length));
        }
        write_record(os, r);
    }
    if (!os) throw IoError("write failed for " + path.string());
}

std::vector<Record> read_shard(const fs::path& path, std::size_t expected_length) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open shard " + path.string());
    std::uint64_t offset = 0;
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || !std::equal(magic, magic + 4, kShardMagic)) {
        throw FormatError("bad shard magic in " + path.string(), 0);
    }
    offset = 4;
    const auto version = byteio::read_le<std::uint16_t>(is, offset, "shard version");
    if (version != kShardVersion) {
        throw FormatError("unsupported shard version " + std::to_string(version) + " in " + path.string(), 4);
    }
    const auto count = byteio::read_le<std::uint32_t>(is, offset, "record count");
    const auto length = byteio::read_le<std::uint32_t>(is, offset, "record length");
    if (length != expected_length) {
        throw FormatError("shard " + path.string() + " has length " + std::to_string(length) + ", manifest says " +
                              std::to_string(expected_length),
                          offset - 4);
    }
    std::vector<Record> records(count);
    for (auto& r : records) {
        r.label = byteio::read_le<std::uint16_t>(is, offset, "record label");
        r.signal.snr_db = decode_snr(byteio::read_le<std::int16_t>(is, offset, "record snr"));
        r.signal.device_id = r.label;
        r.signal.samples.resize(length);
        for (auto& s : r.signal.samples) {
            const float i = byteio::read_le<float>(is, offset, "sample");
            const float q = byteio::read_le<float>(is, offset, "sample");
            s = {i, q};
        }
    }
    if (is.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes in shard " + path.string(), offset);
    }
    return records;
}

Dataset load_dataset(const fs::path& dir, std::string_view split) {
    if (split != "train" && split != "test") {
        throw ConfigError("unknown split '" + std::string(split) + "' (expected train or test)");
    }
    DatasetManifest m = read_manifest(dir);
    const auto& shards = split == "train" ? m.train_shards : m.test_shards;
    std::vector<Record> all;
    for (const auto& name : shards) {
        auto part = read_shard(dir / name, m.window_length);
        for (auto& r : part) {
            if (r.label < 0 || static_cast<std::size_t>(r.label) >= m.n_devices) {
                throw FormatError("label " + std::to_string(r.label) + " out of range in " + name, 0);
            }
        }
        std::move(part.begin(), part.end(), std::back_inserter(all));
    }
    const std::size_t expected = split == "train" ? m.train_count : m.test_count;
    if (all.size() != expected) {
        throw FormatError("split " + std::string(split) + " holds " + std::to_string(all.size()) +
                              " records, manifest says " + std::to_string(expected),
                          0);
    }
    return Dataset(std::move(m), std::move(all));
}

std::vector<std::size_t> Dataset::shuffled_order(std::uint64_t seed) const {
    std::vector<std::size_t> order(records_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    return order;
}

std::vector<std::vector<std::size_t>> Dataset::batches(std::uint64_t seed, std::size_t batch_size) const {
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    const auto order = shuffled_order(seed);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < order.size(); i += batch_size) {
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
    }
    return out;
}

}  // namespace rff::signal
