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

#include "rff/model/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rff/common/byteio.hpp"
#include "rff/common/error.hpp"

namespace rff::model {
inline namespace RFF_NN_ABI {
namespace {

constexpr char kMagic[4] = {'M', 'P', 'D', 'F'};

void write_values(std::ostream& os, std::span<const Real> values) {
    for (const Real v : values) byteio::write_le<float>(os, static_cast<float>(v));
}

void read_values(std::istream& is, std::uint64_t& offset, std::span<Real> out, const char* what) {
    for (auto& v : out) {
        const float f = byteio::read_le<float>(is, offset, what);
        if (!std::isfinite(f)) throw FormatError(std::string("non-finite value in ") + what, offset - 4);
        v = static_cast<Real>(f);
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    const auto named = ckpt.params.named();
    nlohmann::json layout = nlohmann::json::array();
    for (const auto& [name, t] : named) layout.push_back({{"name", name}, {"shape", t.shape()}});
    nlohmann::json header = {
        {"model", to_json(ckpt.config)},
        {"periods", ckpt.periods},
        {"extra", ckpt.extra},
        {"layout", layout},
        {"has_optimizer_state", ckpt.optimizer.has_value()},
    };
    if (ckpt.optimizer) header["optimizer_step"] = ckpt.optimizer->step;
    const std::string text = header.dump();

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write checkpoint " + tmp);
        os.write(kMagic, 4);
        byteio::write_le<std::uint16_t>(os, kCheckpointVersion);
        byteio::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(text.size()));
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        for (const auto& [name, t] : named) write_values(os, t.data());
        if (ckpt.optimizer) {
            const auto& st = *ckpt.optimizer;
            if (st.first_moment.size() != named.size() || st.second_moment.size() != named.size()) {
                throw ConfigError("optimizer state does not match the parameter list");
            }
            for (const auto& m : st.first_moment) write_values(os, m);
            for (const auto& m : st.second_moment) write_values(os, m);
        }
        if (!os) throw IoError("write failed for checkpoint " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path.string());
    std::uint64_t offset = 0;
    char magic[4] = {};
    is.read(magic, 4);
    if (is.gcount() != 4 || !std::equal(magic, magic + 4, kMagic)) {
        throw FormatError("not a checkpoint file (bad magic)", 0);
    }
    offset = 4;
    const auto version = byteio::read_le<std::uint16_t>(is, offset, "version");
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version), offset - 2);
    }
    const auto n = byteio::read_le<std::uint32_t>(is, offset, "header length");
    std::string text(n, '\0');
    is.read(text.data(), n);
    if (static_cast<std::uint32_t>(is.gcount()) != n) throw FormatError("truncated header", offset);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid checkpoint header: ") + e.what(), offset);
    }
    offset += n;

    Checkpoint ckpt;
    try {
        ckpt.config = model_config_from_json(header.at("model"));
        ckpt.periods = header.value("periods", nlohmann::json());
        ckpt.extra = header.value("extra", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("invalid checkpoint header: ") + e.what(), offset);
    }
    ckpt.params = init_params(ckpt.config, 0);
    auto named = ckpt.params.named();
    const auto& layout = header.at("layout");
    if (!layout.is_array() || layout.size() != named.size()) {
        throw ConfigError("checkpoint layout lists " + std::to_string(layout.size()) + " tensors, config implies " +
                          std::to_string(named.size()));
    }
    for (std::size_t i = 0; i < named.size(); ++i) {
        if (layout[i].at("name").get<std::string>() != named[i].first ||
            layout[i].at("shape").get<nn::Shape>() != named[i].second.shape()) {
            throw ConfigError("checkpoint tensor " + std::to_string(i) + " (" + layout[i].at("name").get<std::string>() +
                              ") does not match " + named[i].first);
        }
    }
    for (auto& [name, t] : named) read_values(is, offset, t.mutable_data(), "parameters");
    if (header.value("has_optimizer_state", false)) {
        nn::OptimizerState st;
        st.step = header.value("optimizer_step", std::uint64_t{0});
        for (auto* moments : {&st.first_moment, &st.second_moment}) {
            for (const auto& [name, t] : named) {
                std::vector<Real> m(t.numel());
                read_values(is, offset, m, "optimizer state");
                moments->push_back(std::move(m));
            }
        }
        ckpt.optimizer = std::move(st);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint", offset);
    return ckpt;
}

}  // namespace RFF_NN_ABI
}  // namespace rff::model
