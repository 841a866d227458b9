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

#include "rff/model/mpdformer.hpp"

#include <cmath>
#include <string>

#include "rff/common/error.hpp"
#include "rff/numerics/ops.hpp"

namespace rff::model {
inline namespace RFF_NN_ABI {
namespace {

void push_affine(std::vector<std::pair<std::string, Tensor>>& out, const std::string& name, const Affine& a) {
    out.emplace_back(name + ".weight", a.weight);
    if (a.bias.defined()) out.emplace_back(name + ".bias", a.bias);
}

Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<Real> w(fan_in * fan_out);
    for (auto& v : w) v = static_cast<Real>(rng.uniform(-limit, limit));
    return Tensor::from({fan_in, fan_out}, std::move(w), true);
}

Affine make_affine(std::size_t in, std::size_t out, Rng& rng) {
    return {xavier(in, out, rng), Tensor::zeros({out}, true)};
}

NormParams make_norm(std::size_t d) {
    return {Tensor::full({d}, Real{1}, true), Tensor::zeros({d}, true)};
}

void expect_shape(const Tensor& t, const nn::Shape& shape, const std::string& name) {
    if (!t.defined() || t.shape() != shape) {
        throw ConfigError("parameter " + name + " has shape " + (t.defined() ? nn::shape_str(t.shape()) : "none") +
                          ", config expects " + nn::shape_str(shape));
    }
}

void expect_affine(const Affine& a, std::size_t in, std::size_t out, const std::string& name) {
    expect_shape(a.weight, {in, out}, name + ".weight");
    expect_shape(a.bias, {out}, name + ".bias");
}

std::size_t numel_sum(const std::vector<std::pair<std::string, Tensor>>& tensors, const std::string& prefix) {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors) {
        if (name.compare(0, prefix.size(), prefix) == 0) n += t.numel();
    }
    return n;
}

// Published per-block figures for the 2048-sample, [72, 56] layout.
bool is_reference_layout(const ModelConfig& c) {
    return c.signal_length == 2048 && c.periods == std::vector<std::size_t>{72, 56} && c.n_classes == 32 &&
           c.fusion_hidden == 16 && c.classifier_hidden == std::vector<std::size_t>{128, 64};
}

}  // namespace

std::vector<std::pair<std::string, Tensor>> ModelParams::named() const {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t b = 0; b < branches.size(); ++b) {
        const std::string bp = "branch" + std::to_string(b);
        push_affine(out, bp + ".projection", branches[b].projection);
        for (std::size_t l = 0; l < branches[b].layers.size(); ++l) {
            const auto& layer = branches[b].layers[l];
            const std::string lp = bp + ".layer" + std::to_string(l);
            push_affine(out, lp + ".query", layer.query);
            push_affine(out, lp + ".key", layer.key);
            push_affine(out, lp + ".value", layer.value);
            push_affine(out, lp + ".output", layer.output);
            push_affine(out, lp + ".ffn_in", layer.ffn_in);
            push_affine(out, lp + ".ffn_out", layer.ffn_out);
            out.emplace_back(lp + ".norm1.gain", layer.norm1.gain);
            out.emplace_back(lp + ".norm1.bias", layer.norm1.bias);
            out.emplace_back(lp + ".norm2.gain", layer.norm2.gain);
            out.emplace_back(lp + ".norm2.bias", layer.norm2.bias);
        }
    }
    out.emplace_back("fusion.w1", fusion_w1);
    out.emplace_back("fusion.w2", fusion_w2);
    for (std::size_t i = 0; i < classifier.size(); ++i) {
        push_affine(out, "classifier" + std::to_string(i), classifier[i]);
    }
    return out;
}

std::vector<Tensor> ModelParams::tensors() const {
    std::vector<Tensor> out;
    for (auto& [name, t] : named()) out.push_back(t);
    return out;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelParams p;
    std::uint64_t block = 0;
    auto next_rng = [&] { return Rng(derive_seed(seed, 0x696e6974, block++)); };
    for (const auto& bc : config.branches()) {
        BranchParams branch;
        Rng rng = next_rng();
        branch.projection = make_affine(bc.width, bc.width, rng);
        for (std::size_t l = 0; l < bc.n_layers; ++l) {
            Rng lr = next_rng();
            EncoderLayerParams layer;
            layer.query = make_affine(bc.width, bc.width, lr);
            layer.key = make_affine(bc.width, bc.width, lr);
            layer.value = make_affine(bc.width, bc.width, lr);
            layer.output = make_affine(bc.width, bc.width, lr);
            layer.ffn_in = make_affine(bc.width, bc.rows, lr);
            layer.ffn_out = make_affine(bc.rows, bc.width, lr);
            layer.norm1 = make_norm(bc.width);
            layer.norm2 = make_norm(bc.width);
            branch.layers.push_back(std::move(layer));
        }
        p.branches.push_back(std::move(branch));
    }
    Rng fr = next_rng();
    const std::size_t k = config.periods.size();
    p.fusion_w1 = xavier(k, config.fusion_hidden, fr);
    p.fusion_w2 = xavier(config.fusion_hidden, k, fr);
    Rng cr = next_rng();
    std::size_t in = config.fused_width();
    for (const std::size_t h : config.classifier_hidden) {
        p.classifier.push_back(make_affine(in, h, cr));
        in = h;
    }
    p.classifier.push_back(make_affine(in, config.n_classes, cr));
    return p;
}

void check_params(const ModelConfig& config, const ModelParams& params) {
    const auto bcs = config.branches();
    if (params.branches.size() != bcs.size()) {
        throw ConfigError("parameters hold " + std::to_string(params.branches.size()) + " branches, config has " +
                          std::to_string(bcs.size()));
    }
    for (std::size_t b = 0; b < bcs.size(); ++b) {
        const auto& bc = bcs[b];
        const auto& bp = params.branches[b];
        const std::string name = "branch" + std::to_string(b);
        expect_affine(bp.projection, bc.width, bc.width, name + ".projection");
        if (bp.layers.size() != bc.n_layers) {
            throw ConfigError(name + " has " + std::to_string(bp.layers.size()) + " layers, config has " +
                              std::to_string(bc.n_layers));
        }
        for (std::size_t l = 0; l < bc.n_layers; ++l) {
            const auto& layer = bp.layers[l];
            const std::string ln = name + ".layer" + std::to_string(l);
            expect_affine(layer.query, bc.width, bc.width, ln + ".query");
            expect_affine(layer.key, bc.width, bc.width, ln + ".key");
            expect_affine(layer.value, bc.width, bc.width, ln + ".value");
            expect_affine(layer.output, bc.width, bc.width, ln + ".output");
            expect_affine(layer.ffn_in, bc.width, bc.rows, ln + ".ffn_in");
            expect_affine(layer.ffn_out, bc.rows, bc.width, ln + ".ffn_out");
            expect_shape(layer.norm1.gain, {bc.width}, ln + ".norm1.gain");
            expect_shape(layer.norm1.bias, {bc.width}, ln + ".norm1.bias");
            expect_shape(layer.norm2.gain, {bc.width}, ln + ".norm2.gain");
            expect_shape(layer.norm2.bias, {bc.width}, ln + ".norm2.bias");
        }
    }
    const std::size_t k = bcs.size();
    expect_shape(params.fusion_w1, {k, config.fusion_hidden}, "fusion.w1");
    expect_shape(params.fusion_w2, {config.fusion_hidden, k}, "fusion.w2");
    if (params.classifier.size() != config.classifier_hidden.size() + 1) {
        throw ConfigError("classifier depth does not match config");
    }
    std::size_t in = config.fused_width();
    for (std::size_t i = 0; i < params.classifier.size(); ++i) {
        const std::size_t out = i < config.classifier_hidden.size() ? config.classifier_hidden[i] : config.n_classes;
        expect_affine(params.classifier[i], in, out, "classifier" + std::to_string(i));
        in = out;
    }
}

Tensor encoder_layer(const Tensor& x, const EncoderLayerParams& layer, const BranchConfig& branch,
                     const ModelConfig& config) {
    std::optional<Tensor> inter, intra;
    if (config.enable_inter || config.enable_intra) {
        const Tensor q = layer.query(x);
        const Tensor k = layer.key(x);
        const Tensor v = layer.value(x);
        if (config.enable_inter) {
            inter = layer.output(inter_period_attention(q, k, v, branch.n_heads));
        }
        if (config.enable_intra) {
            const auto path = config.fft_inference ? CorrelationPath::fft : CorrelationPath::direct;
            intra = intra_period_attention(q, k, v, branch.k_delay, branch.period, path);
        }
    }
    const Tensor gamma = fuse_attention(x, inter, intra, config.sigma, config.varsigma);
    const Tensor h = nn::layer_norm(gamma, layer.norm1.gain, layer.norm1.bias);
    const Tensor f = ffn_forward(h, layer.ffn_in, layer.ffn_out);
    return nn::layer_norm(nn::add(h, f), layer.norm2.gain, layer.norm2.bias);
}

ForwardOutput model_forward(std::span<const signal::IQSignal* const> batch, const ModelParams& params,
                            const ModelConfig& config, const ForwardOptions& options) {
    if (batch.empty()) throw DimensionError("model_forward: empty batch");
    if (batch.front()->length() != config.signal_length) {
        throw DimensionError("model_forward: signal length " + std::to_string(batch.front()->length()) +
                             " does not match configured " + std::to_string(config.signal_length));
    }
    const auto bcs = config.branches();
    if (params.branches.size() != bcs.size()) {
        throw ConfigError("model_forward: parameters do not match the period configuration");
    }
    if (options.training && config.dropout > 0 && !options.rng) {
        throw ConfigError("model_forward: training with dropout needs an rng");
    }
    std::vector<Tensor> pooled;
    pooled.reserve(bcs.size());
    for (std::size_t b = 0; b < bcs.size(); ++b) {
        const auto& bc = bcs[b];
        const auto& bp = params.branches[b];
        Tensor x = bp.projection(periodic_embed(batch, bc.period));
        x = nn::scale(x, static_cast<Real>(std::sqrt(static_cast<double>(bc.width))));
        x = nn::add(x, positional_encoding(bc.rows, bc.width));
        for (const auto& layer : bp.layers) x = encoder_layer(x, layer, bc, config);
        pooled.push_back(branch_pool(x));
    }
    FusionOutput fusion = adaptive_fusion(pooled, params.fusion_w1, params.fusion_w2);
    Rng idle(0);
    Rng& rng = options.rng ? *options.rng : idle;
    Tensor logits = classifier_forward(fusion.fused, params.classifier, static_cast<Real>(config.dropout), rng,
                                       options.training);
    return {std::move(logits), std::move(fusion.fused), std::move(fusion.weights)};
}

ForwardOutput model_forward(const signal::IQSignal& x, const ModelParams& params, const ModelConfig& config,
                            const ForwardOptions& options) {
    const signal::IQSignal* one[] = {&x};
    return model_forward(std::span<const signal::IQSignal* const>(one), params, config, options);
}

ParamReport count_params(const ModelConfig& config, const ModelParams& params) {
    const auto tensors = params.named();
    const bool ref = is_reference_layout(config);
    const std::size_t proj_ref[] = {20880, 12656};
    const std::size_t enc_ref[] = {1046466, 635454};
    const std::size_t cls_ref[] = {32896, 8256, 2080};
    ParamReport report;
    for (std::size_t b = 0; b < params.branches.size(); ++b) {
        const std::string bp = "branch" + std::to_string(b);
        ParamBlock proj{bp + ".projection", numel_sum(tensors, bp + ".projection."), std::nullopt};
        ParamBlock enc{bp + ".encoder", numel_sum(tensors, bp + ".layer"), std::nullopt};
        if (ref) {
            proj.reference = proj_ref[b];
            enc.reference = enc_ref[b];
        }
        report.blocks.push_back(std::move(proj));
        report.blocks.push_back(std::move(enc));
    }
    ParamBlock fusion{"fusion", numel_sum(tensors, "fusion."), std::nullopt};
    if (ref) fusion.reference = 64;
    report.blocks.push_back(std::move(fusion));
    for (std::size_t i = 0; i < params.classifier.size(); ++i) {
        const std::string name = "classifier" + std::to_string(i);
        ParamBlock block{name, numel_sum(tensors, name + "."), std::nullopt};
        if (ref && i < 3) block.reference = cls_ref[i];
        report.blocks.push_back(std::move(block));
    }
    for (const auto& block : report.blocks) report.total += block.count;
    return report;
}

std::uint64_t estimate_macs(const ModelConfig& config) {
    std::uint64_t macs = 0;
    for (const auto& bc : config.branches()) {
        const std::uint64_t n = bc.rows, d = bc.width;
        macs += n * d * d;  // projection
        for (std::size_t l = 0; l < bc.n_layers; ++l) {
            if (config.enable_inter || config.enable_intra) macs += 3 * n * d * d;
            if (config.enable_inter) macs += 2 * n * n * d + n * d * d;
            if (config.enable_intra) macs += n * d * d + bc.k_delay * n * d;
            macs += 2 * n * d * n;  // FFN
        }
    }
    const std::uint64_t k = config.periods.size();
    macs += 2 * k * config.fusion_hidden;
    std::uint64_t in = config.fused_width();
    for (const std::size_t h : config.classifier_hidden) {
        macs += in * h;
        in = h;
    }
    macs += in * config.n_classes;
    return macs;
}

}  // namespace RFF_NN_ABI
}  // namespace rff::model
