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

#include "rff/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>

#include "rff/common/error.hpp"

namespace rff::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& section, const std::set<std::string>& known) {
    if (!j.is_object()) throw ConfigError(section + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown key " + section + "." + key);
    }
}

template <typename T>
void get(const json& j, const std::string& section, const char* key, T& field) {
    if (!j.contains(key)) return;
    try {
        field = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(section + "." + key + " has the wrong type");
    }
}

signal::Snr snr_from_json(const json& j, const std::string& where) {
    if (j.is_number_integer()) return j.get<int>();
    if (j.is_string() && j.get<std::string>() == "clean") return std::nullopt;
    throw ConfigError(where + " must be an integer dB value or \"clean\"");
}

json snr_to_json(const signal::Snr& s) { return s ? json(*s) : json("clean"); }

signal::ImpairmentRanges ranges_from_json(const json& j, signal::ImpairmentRanges r) {
    const std::string sec = "dataset.impairments";
    reject_unknown(j, sec,
                   {"cfo_hz_max", "phase_offset_max_rad", "iq_gain_deviation_max", "iq_phase_max_rad", "dc_offset_max",
                    "a1_min", "a1_max", "a3_min", "a3_max"});
    get(j, sec, "cfo_hz_max", r.cfo_hz_max);
    get(j, sec, "phase_offset_max_rad", r.phase_offset_max_rad);
    get(j, sec, "iq_gain_deviation_max", r.iq_gain_deviation_max);
    get(j, sec, "iq_phase_max_rad", r.iq_phase_max_rad);
    get(j, sec, "dc_offset_max", r.dc_offset_max);
    get(j, sec, "a1_min", r.a1_min);
    get(j, sec, "a1_max", r.a1_max);
    get(j, sec, "a3_min", r.a3_min);
    get(j, sec, "a3_max", r.a3_max);
    r.validate();
    return r;
}

json ranges_to_json(const signal::ImpairmentRanges& r) {
    return {{"cfo_hz_max", r.cfo_hz_max},       {"phase_offset_max_rad", r.phase_offset_max_rad},
            {"iq_gain_deviation_max", r.iq_gain_deviation_max}, {"iq_phase_max_rad", r.iq_phase_max_rad},
            {"dc_offset_max", r.dc_offset_max}, {"a1_min", r.a1_min},
            {"a1_max", r.a1_max},               {"a3_min", r.a3_min},
            {"a3_max", r.a3_max}};
}

SpectrumOptions spectrum_from_json(const json& j, SpectrumOptions s) {
    reject_unknown(j, "spectrum", {"snr", "k", "alignment", "split"});
    if (j.contains("snr")) s.snr = snr_from_json(j.at("snr"), "spectrum.snr");
    get(j, "spectrum", "k", s.k);
    get(j, "spectrum", "alignment", s.alignment);
    get(j, "spectrum", "split", s.split);
    if (s.k < 1) throw ConfigError("spectrum.k must be >= 1");
    if (s.alignment < 1) throw ConfigError("spectrum.alignment must be >= 1");
    if (s.split != "train" && s.split != "test") throw ConfigError("spectrum.split must be \"train\" or \"test\"");
    return s;
}

}  // namespace

signal::DatasetSpec dataset_spec_from_json(const json& j, signal::DatasetSpec s) {
    const std::string sec = "dataset";
    reject_unknown(j, sec,
                   {"kind", "n_devices", "records_per_device_per_snr", "snr_list", "test_fraction", "seed",
                    "window_length", "records_per_shard", "impairments"});
    if (j.contains("kind")) {
        if (!j.at("kind").is_string()) throw ConfigError("dataset.kind must be \"CDR\" or \"RDR\"");
        s.kind = signal::parse_dataset_kind(j.at("kind").get<std::string>());
    }
    get(j, sec, "n_devices", s.n_devices);
    get(j, sec, "records_per_device_per_snr", s.records_per_device_per_snr);
    if (j.contains("snr_list")) s.snr_list = signal::snr_list_from_json(j.at("snr_list"));
    get(j, sec, "test_fraction", s.test_fraction);
    get(j, sec, "seed", s.seed);
    get(j, sec, "window_length", s.window_length);
    get(j, sec, "records_per_shard", s.records_per_shard);
    if (j.contains("impairments")) s.impairments = ranges_from_json(j.at("impairments"), s.impairments);
    s.validate();
    return s;
}

json to_json(const signal::DatasetSpec& s) {
    return {{"kind", signal::to_string(s.kind)},
            {"n_devices", s.n_devices},
            {"records_per_device_per_snr", s.records_per_device_per_snr},
            {"snr_list", signal::snr_list_to_json(s.snr_list)},
            {"test_fraction", s.test_fraction},
            {"seed", s.seed},
            {"window_length", s.effective_window_length()},
            {"records_per_shard", s.records_per_shard},
            {"impairments", ranges_to_json(s.impairments)}};
}

CliConfig config_from_json(const json& j) {
    reject_unknown(j, "config", {"dataset", "spectrum", "model", "train"});
    CliConfig c;
    if (j.contains("dataset")) c.dataset = dataset_spec_from_json(j.at("dataset"));
    if (j.contains("spectrum")) c.spectrum = spectrum_from_json(j.at("spectrum"), c.spectrum);
    if (j.contains("model")) c.model = model::model_config_from_json(j.at("model"));
    if (j.contains("train")) c.train = training::train_config_from_json(j.at("train"));
    return c;
}

json to_json(const CliConfig& c) {
    return {{"dataset", to_json(c.dataset)},
            {"spectrum",
             {{"snr", snr_to_json(c.spectrum.snr)},
              {"k", c.spectrum.k},
              {"alignment", c.spectrum.alignment},
              {"split", c.spectrum.split}}},
            {"model", model::to_json(c.model)},
            {"train", training::to_json(c.train)}};
}

CliConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::stringstream buf;
    buf << is.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw FormatError("config " + path.string() + " is not valid JSON: " + e.what(), e.byte);
    }
    return config_from_json(j);
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, std::uint64_t config_value) {
    if (flag) return *flag;
    if (const char* env = std::getenv("RFF_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(std::string("RFF_SEED is not an unsigned integer: ") + env);
        }
    }
    return config_value;
}

}  // namespace rff::cli
