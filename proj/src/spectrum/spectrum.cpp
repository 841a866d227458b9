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

#include "rff/spectrum/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rff/common/error.hpp"
#include "rff/common/fft.hpp"

namespace rff::spectrum {
using nlohmann::json;

std::vector<std::size_t> PeriodSet::periods() const {
    std::vector<std::size_t> out;
    for (const auto& e : entries) out.push_back(e.p);
    return out;
}

PsdVector compute_psd(const signal::IQSignal& x) {
    const std::size_t n = x.length();
    if (n < 2) throw DimensionError("compute_psd: need at least 2 samples");
    std::vector<dsp::cdouble> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = {x.samples[i].real(), x.samples[i].imag()};
    const auto spec = dsp::fft(buf);
    PsdVector psd;
    psd.bin_hz = x.sample_rate_hz / static_cast<double>(n);
    psd.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) psd.values[i] = std::norm(spec[i]) / static_cast<double>(n);
    return psd;
}

SpectrumOffsetProfile spectrum_offset(std::span<const PsdVector> psds) {
    if (psds.size() < 2) throw ConfigError("spectrum_offset: need at least 2 PSDs");
    const std::size_t n = psds.front().values.size();
    for (const auto& p : psds) {
        if (p.values.size() != n) {
            throw DimensionError("spectrum_offset: mixed PSD lengths " + std::to_string(n) + " and " +
                                 std::to_string(p.values.size()));
        }
    }
    SpectrumOffsetProfile prof;
    prof.n_signals = psds.size();
    prof.mu.assign(n, 0.0);
    prof.v.assign(n, 0.0);
    const double inv = 1.0 / static_cast<double>(psds.size());
    for (const auto& p : psds)
        for (std::size_t f = 0; f < n; ++f) prof.mu[f] += p.values[f];
    for (auto& m : prof.mu) m *= inv;
    for (const auto& p : psds) {
        for (std::size_t f = 0; f < n; ++f) {
            const double d = p.values[f] - prof.mu[f];
            prof.v[f] += d * d;
        }
    }
    for (auto& v : prof.v) v = std::sqrt(v * inv);
    return prof;
}

PeriodSet select_top_k(const SpectrumOffsetProfile& profile, std::size_t k, std::size_t length) {
    if (profile.v.size() != length) {
        throw DimensionError("select_top_k: profile has " + std::to_string(profile.v.size()) + " bins, L = " +
                             std::to_string(length));
    }
    const std::size_t eligible = length / 2;
    if (k < 1 || k > eligible) {
        throw ConfigError("select_top_k: k = " + std::to_string(k) + " outside [1, " + std::to_string(eligible) + "]");
    }
    std::vector<std::size_t> bins(eligible);
    std::iota(bins.begin(), bins.end(), std::size_t{1});
    std::partial_sort(bins.begin(), bins.begin() + static_cast<std::ptrdiff_t>(k), bins.end(),
                      [&](std::size_t a, std::size_t b) {
                          return profile.v[a] > profile.v[b] || (profile.v[a] == profile.v[b] && a < b);
                      });
    PeriodSet set;
    set.length = length;
    set.k = k;
    set.alignment = 1;
    for (std::size_t i = 0; i < k; ++i) {
        PeriodEntry e;
        e.amplitude = profile.v[bins[i]];
        e.f_raw = bins[i];
        e.p_raw = (length + bins[i] - 1) / bins[i];
        e.f = e.f_raw;
        e.p = e.p_raw;
        set.entries.push_back(e);
    }
    return set;
}

PeriodSet refine_periods(const PeriodSet& raw, std::size_t alignment) {
    if (alignment < 1) throw ConfigError("refine_periods: alignment must be >= 1");
    PeriodSet out;
    out.length = raw.length;
    out.k = raw.k;
    out.alignment = alignment;
    for (const auto& e : raw.entries) {
        std::size_t p = ((e.p_raw + alignment / 2) / alignment) * alignment;
        p = std::max(p, alignment);
        if (p > raw.length) continue;
        const bool duplicate = std::any_of(out.entries.begin(), out.entries.end(),
                                           [p](const PeriodEntry& x) { return x.p == p; });
        if (duplicate) continue;
        PeriodEntry r = e;
        r.p = p;
        r.f = static_cast<std::size_t>(std::llround(static_cast<double>(raw.length) / static_cast<double>(p)));
        out.entries.push_back(r);
    }
    if (out.entries.empty()) throw ConfigError("degenerate period set");
    return out;
}

json period_set_to_json(const PeriodSet& set) {
    json entries = json::array();
    for (const auto& e : set.entries) {
        entries.push_back({{"v", e.amplitude}, {"f_raw", e.f_raw}, {"p_raw", e.p_raw}, {"f", e.f}, {"p", e.p}});
    }
    return {{"L", set.length}, {"k", set.k}, {"alignment", set.alignment}, {"entries", entries}};
}

PeriodSet period_set_from_json(const json& j) {
    PeriodSet set;
    try {
        set.length = j.at("L").get<std::size_t>();
        set.k = j.at("k").get<std::size_t>();
        set.alignment = j.at("alignment").get<std::size_t>();
        for (const auto& e : j.at("entries")) {
            PeriodEntry x;
            x.amplitude = e.at("v").get<double>();
            x.f_raw = e.at("f_raw").get<std::size_t>();
            x.p_raw = e.at("p_raw").get<std::size_t>();
            x.f = e.at("f").get<std::size_t>();
            x.p = e.at("p").get<std::size_t>();
            set.entries.push_back(x);
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed period file: ") + e.what(), 0);
    }
    if (set.entries.empty()) throw FormatError("period file has no entries", 0);
    for (const auto& e : set.entries) {
        if (e.p == 0 || e.p > set.length) {
            throw FormatError("period " + std::to_string(e.p) + " invalid for L = " + std::to_string(set.length), 0);
        }
    }
    return set;
}

void write_period_file(const std::filesystem::path& path, const PeriodSet& set) {
    std::ofstream os(path, std::ios::trunc);
    os << period_set_to_json(set).dump(2) << '\n';
    if (!os) throw IoError("cannot write " + path.string());
}

PeriodSet read_period_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open period file " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw FormatError("period file " + path.string() + " is not JSON: " + e.what(), 0);
    }
    return period_set_from_json(j);
}

PeriodSet period_set_from_periods(std::span<const std::size_t> periods, std::size_t length, std::size_t alignment) {
    PeriodSet set;
    set.length = length;
    set.k = periods.size();
    set.alignment = alignment;
    for (std::size_t p : periods) {
        if (p == 0 || p > length) {
            throw ConfigError("period " + std::to_string(p) + " invalid for L = " + std::to_string(length));
        }
        PeriodEntry e;
        e.p = e.p_raw = p;
        e.f = e.f_raw = static_cast<std::size_t>(std::llround(static_cast<double>(length) / static_cast<double>(p)));
        set.entries.push_back(e);
    }
    if (set.entries.empty()) throw ConfigError("degenerate period set");
    return set;
}

}  // namespace rff::spectrum
