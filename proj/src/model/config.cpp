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

#include "rff/model/config.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <type_traits>

#include "rff/common/error.hpp"

namespace rff::model {
using nlohmann::json;

std::vector<BranchConfig> ModelConfig::branches() const {
    std::vector<BranchConfig> out;
    for (std::size_t p : periods) {
        BranchConfig b;
        b.period = p;
        b.frequency = p ? (signal_length + p / 2) / p : 0;
        b.rows = p ? (signal_length + p - 1) / p : 0;
        b.width = 2 * p;
        b.n_layers = n_layers;
        b.n_heads = n_heads;
        b.k_delay = p > 1 ? std::min(k_delay, p - 1) : 0;
        out.push_back(b);
    }
    return out;
}

std::size_t ModelConfig::fused_width() const {
    std::size_t w = 0;
    for (std::size_t p : periods) w += 2 * p;
    return w;
}

void ModelConfig::validate() const {
    if (signal_length < 2) throw ConfigError("model.signal_length must be >= 2");
    if (periods.empty()) throw ConfigError("model.periods must not be empty");
    for (std::size_t p : periods) {
        if (p < 1 || p > signal_length) {
            throw ConfigError("model.periods: period " + std::to_string(p) + " must be in [1, L = " +
                              std::to_string(signal_length) + "]");
        }
        if (n_heads == 0 || (2 * p) % n_heads != 0) {
            throw ConfigError("model.n_heads = " + std::to_string(n_heads) + " does not divide width 2p = " +
                              std::to_string(2 * p));
        }
        if (enable_intra && p < 2) throw ConfigError("model: intra-period attention needs every period >= 2");
    }
    if (n_layers == 0) throw ConfigError("model.n_layers must be >= 1");
    if (enable_intra && k_delay == 0) throw ConfigError("model.k_delay must be >= 1");
    if (sigma < 0 || varsigma < 0) throw ConfigError("model.sigma and model.varsigma must be >= 0");
    if (n_classes < 2) throw ConfigError("model.n_classes must be >= 2");
    if (dropout < 0 || dropout >= 1) throw ConfigError("model.dropout must be in [0, 1)");
    if (fusion_hidden == 0) throw ConfigError("model.fusion_hidden must be >= 1");
    for (std::size_t h : classifier_hidden) {
        if (h == 0) throw ConfigError("model.classifier_hidden widths must be >= 1");
    }
}

json to_json(const ModelConfig& c) {
    return {{"signal_length", c.signal_length},
            {"periods", c.periods},
            {"n_layers", c.n_layers},
            {"n_heads", c.n_heads},
            {"k_delay", c.k_delay},
            {"sigma", c.sigma},
            {"varsigma", c.varsigma},
            {"n_classes", c.n_classes},
            {"dropout", c.dropout},
            {"fusion_hidden", c.fusion_hidden},
            {"classifier_hidden", c.classifier_hidden},
            {"enable_inter", c.enable_inter},
            {"enable_intra", c.enable_intra},
            {"fft_inference", c.fft_inference}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
    if (!j.is_object()) throw ConfigError("model section must be an object");
    static const std::set<std::string> known = {
        "signal_length", "periods",       "n_layers",          "n_heads",      "k_delay",
        "sigma",         "varsigma",      "n_classes",         "dropout",      "fusion_hidden",
        "classifier_hidden", "enable_inter", "enable_intra",   "fft_inference"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("model: unknown key '" + key + "'");
    }
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        get("signal_length", c.signal_length);
        get("periods", c.periods);
        get("n_layers", c.n_layers);
        get("n_heads", c.n_heads);
        get("k_delay", c.k_delay);
        get("sigma", c.sigma);
        get("varsigma", c.varsigma);
        get("n_classes", c.n_classes);
        get("dropout", c.dropout);
        get("fusion_hidden", c.fusion_hidden);
        get("classifier_hidden", c.classifier_hidden);
        get("enable_inter", c.enable_inter);
        get("enable_intra", c.enable_intra);
        get("fft_inference", c.fft_inference);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return c;
}

}  // namespace rff::model
