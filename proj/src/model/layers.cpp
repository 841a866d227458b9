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

#include "rff/model/layers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include "rff/common/error.hpp"
#include "rff/numerics/ops.hpp"
#include "rff/numerics/spectral.hpp"

namespace rff::model {
inline namespace RFF_NN_ABI {
namespace {

void require_rank_2_or_3(const Tensor& t, const char* op) {
    if (t.rank() != 2 && t.rank() != 3) {
        throw DimensionError(std::string(op) + ": expected [N, d] or [B, N, d], got " + nn::shape_str(t.shape()));
    }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shapes " + nn::shape_str(a.shape()) + " and " +
                             nn::shape_str(b.shape()) + " differ");
    }
}

struct Dims {
    std::size_t batch, rows, width;
};

Dims dims_of(const Tensor& t) {
    if (t.rank() == 2) return {1, t.dim(0), t.dim(1)};
    return {t.dim(0), t.dim(1), t.dim(2)};
}

// Row-averaged correlation of one sample; q and k point at [rows, width].
void correlation_direct(const Real* q, const Real* k, std::size_t rows, std::size_t width, Real* curve) {
    const double norm = 1.0 / static_cast<double>(rows * width);
    for (std::size_t tau = 0; tau < width; ++tau) {
        double acc = 0.0;
        for (std::size_t n = 0; n < rows; ++n) {
            const Real* qr = q + n * width;
            const Real* kr = k + n * width;
            const std::size_t head = width - tau;
            for (std::size_t t = 0; t < head; ++t) acc += static_cast<double>(qr[t + tau]) * kr[t];
            for (std::size_t t = head; t < width; ++t) acc += static_cast<double>(qr[t + tau - width]) * kr[t];
        }
        curve[tau] = static_cast<Real>(acc * norm);
    }
}

void correlation_fft(const Real* q, const Real* k, std::size_t rows, std::size_t width, Real* curve) {
    std::vector<std::complex<Real>> cross(width / 2 + 1);
    for (std::size_t n = 0; n < rows; ++n) {
        const auto fq = nn::rfft({q + n * width, width});
        const auto fk = nn::rfft({k + n * width, width});
        for (std::size_t i = 0; i < cross.size(); ++i) cross[i] += fq[i] * std::conj(fk[i]);
    }
    const auto r = nn::irfft(cross, width);
    const Real norm = Real(1) / static_cast<Real>(rows * width);
    for (std::size_t tau = 0; tau < width; ++tau) curve[tau] = r[tau] * norm;
}

}  // namespace

Tensor Affine::operator()(const Tensor& x) const {
    if (bias.defined()) return nn::linear(x, weight, bias);
    return nn::linear(x, weight, std::nullopt);
}

Tensor periodic_embed(const signal::IQSignal& x, std::size_t period) {
    const signal::IQSignal* one[] = {&x};
    const Tensor batch = periodic_embed(std::span<const signal::IQSignal* const>(one), period);
    return nn::reshape(batch, {batch.dim(1), batch.dim(2)});
}

Tensor periodic_embed(std::span<const signal::IQSignal* const> batch, std::size_t period) {
    if (batch.empty()) throw DimensionError("periodic_embed: empty batch");
    if (period == 0) throw ConfigError("periodic_embed: period must be >= 1");
    const std::size_t length = batch.front()->length();
    if (period > length) {
        throw ConfigError("periodic_embed: period " + std::to_string(period) + " exceeds signal length " +
                          std::to_string(length));
    }
    const std::size_t rows = (length + period - 1) / period;
    const std::size_t width = 2 * period;
    std::vector<Real> out(batch.size() * rows * width, Real{0});
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto& s = batch[b]->samples;
        if (s.size() != length) {
            throw DimensionError("periodic_embed: signal " + std::to_string(b) + " has length " +
                                 std::to_string(s.size()) + ", expected " + std::to_string(length));
        }
        Real* base = out.data() + b * rows * width;
        for (std::size_t i = 0; i < length; ++i) {
            const std::size_t n = i / period, j = i % period;
            base[n * width + j] = static_cast<Real>(s[i].real());
            base[n * width + period + j] = static_cast<Real>(s[i].imag());
        }
    }
    return Tensor::from({batch.size(), rows, width}, std::move(out));
}

Tensor positional_encoding(std::size_t rows, std::size_t width) {
    if (width % 2 != 0) throw DimensionError("positional_encoding: width must be even");
    std::vector<Real> pe(rows * width);
    for (std::size_t pos = 0; pos < rows; ++pos) {
        for (std::size_t i = 0; i < width / 2; ++i) {
            const double angle =
                static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(2 * i) / static_cast<double>(width));
            pe[pos * width + 2 * i] = static_cast<Real>(std::sin(angle));
            pe[pos * width + 2 * i + 1] = static_cast<Real>(std::cos(angle));
        }
    }
    return Tensor::from({rows, width}, std::move(pe));
}

Tensor inter_period_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads) {
    require_rank_2_or_3(q, "inter_period_attention");
    require_same(q, k, "inter_period_attention");
    require_same(q, v, "inter_period_attention");
    const std::size_t d = q.shape().back();
    if (n_heads == 0 || d % n_heads != 0) {
        throw ConfigError("inter_period_attention: width " + std::to_string(d) + " not divisible by " +
                          std::to_string(n_heads) + " heads");
    }
    const std::size_t dh = d / n_heads;
    const Real inv = Real(1) / static_cast<Real>(dh);
    auto head = [&](const Tensor& qh, const Tensor& kh, const Tensor& vh) {
        const Tensor scores = nn::scale(nn::matmul_nt(qh, kh), inv);
        return nn::matmul(nn::softmax(scores, scores.rank() - 1), vh);
    };
    if (n_heads == 1) return head(q, k, v);
    std::vector<Tensor> parts;
    parts.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h) {
        parts.push_back(head(nn::slice_last(q, h * dh, dh), nn::slice_last(k, h * dh, dh),
                             nn::slice_last(v, h * dh, dh)));
    }
    return nn::concat_last(parts);
}

Tensor intra_period_correlation(const Tensor& q, const Tensor& k, CorrelationPath path) {
    require_rank_2_or_3(q, "intra_period_correlation");
    require_same(q, k, "intra_period_correlation");
    const auto [batch, rows, width] = dims_of(q);
    std::vector<Real> curve(batch * width);
    const auto qs = q.data();
    const auto ks = k.data();
    for (std::size_t b = 0; b < batch; ++b) {
        const Real* qb = qs.data() + b * rows * width;
        const Real* kb = ks.data() + b * rows * width;
        if (path == CorrelationPath::fft) {
            correlation_fft(qb, kb, rows, width, curve.data() + b * width);
        } else {
            correlation_direct(qb, kb, rows, width, curve.data() + b * width);
        }
    }
    nn::Shape shape = q.rank() == 2 ? nn::Shape{width} : nn::Shape{batch, width};
    if (path == CorrelationPath::fft) return Tensor::from(std::move(shape), std::move(curve));
    return Tensor::make_result(
        "intra_correlation", std::move(shape), std::move(curve), {q, k},
        [batch, rows, width](nn::TensorImpl& out) {
            auto& qi = *out.parents[0];
            auto& ki = *out.parents[1];
            Real* gq = qi.requires_grad ? qi.grad_buffer().data() : nullptr;
            Real* gk = ki.requires_grad ? ki.grad_buffer().data() : nullptr;
            const Real norm = Real(1) / static_cast<Real>(rows * width);
            for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t tau = 0; tau < width; ++tau) {
                    const Real g = out.grad[b * width + tau] * norm;
                    if (g == 0) continue;
                    for (std::size_t n = 0; n < rows; ++n) {
                        const std::size_t off = (b * rows + n) * width;
                        for (std::size_t t = 0; t < width; ++t) {
                            const std::size_t s = (t + tau) % width;
                            if (gq) gq[off + s] += g * ki.data[off + t];
                            if (gk) gk[off + t] += g * qi.data[off + s];
                        }
                    }
                }
            }
        });
}

std::vector<Real> roll(std::span<const Real> v, std::size_t shift) {
    const std::size_t d = v.size();
    std::vector<Real> out(d);
    if (d == 0) return out;
    shift %= d;
    for (std::size_t t = 0; t < d; ++t) out[t] = v[(t + shift) % d];
    return out;
}

DelaySet select_delays(std::span<const Real> curve, std::size_t k_delay, std::size_t period) {
    if (period <= 1) throw ConfigError("select_delays: period must be > 1");
    if (k_delay == 0 || k_delay >= period) {
        throw ConfigError("select_delays: k_delay " + std::to_string(k_delay) + " must lie in [1, " +
                          std::to_string(period - 1) + "]");
    }
    const std::size_t limit = std::min(period, curve.size());
    if (limit <= k_delay) {
        throw DimensionError("select_delays: curve of length " + std::to_string(curve.size()) +
                             " has fewer than " + std::to_string(k_delay) + " candidate lags");
    }
    std::vector<std::size_t> lags(limit - 1);
    std::iota(lags.begin(), lags.end(), std::size_t{1});
    std::partial_sort(lags.begin(), lags.begin() + static_cast<std::ptrdiff_t>(k_delay), lags.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (curve[a] != curve[b]) return curve[a] > curve[b];
                          return a < b;
                      });
    DelaySet out;
    out.taus.assign(lags.begin(), lags.begin() + static_cast<std::ptrdiff_t>(k_delay));
    for (const std::size_t tau : out.taus) out.scores.push_back(curve[tau]);
    return out;
}

Tensor intra_period_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t k_delay,
                              std::size_t period, CorrelationPath path, std::vector<DelaySet>* delays) {
    require_rank_2_or_3(q, "intra_period_attention");
    require_same(q, k, "intra_period_attention");
    require_same(q, v, "intra_period_attention");
    const auto [batch, rows, width] = dims_of(q);
    const bool recording = nn::grad_enabled() && (q.requires_grad() || k.requires_grad() || v.requires_grad());
    if (recording) path = CorrelationPath::direct;

    std::vector<Real> curve(width);
    std::vector<std::size_t> taus(batch * k_delay);
    std::vector<Real> weights(batch * k_delay);
    std::vector<Real> out(batch * rows * width, Real{0});
    const auto qs = q.data(), ks = k.data(), vs = v.data();
    if (delays) delays->clear();

    for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t off = b * rows * width;
        if (path == CorrelationPath::fft) {
            correlation_fft(qs.data() + off, ks.data() + off, rows, width, curve.data());
        } else {
            correlation_direct(qs.data() + off, ks.data() + off, rows, width, curve.data());
        }
        DelaySet sel = select_delays(curve, k_delay, period);
        const Real top = sel.scores.front();
        double total = 0.0;
        for (std::size_t m = 0; m < k_delay; ++m) {
            weights[b * k_delay + m] = std::exp(sel.scores[m] - top);
            total += weights[b * k_delay + m];
        }
        for (std::size_t m = 0; m < k_delay; ++m) {
            weights[b * k_delay + m] = static_cast<Real>(weights[b * k_delay + m] / total);
            taus[b * k_delay + m] = sel.taus[m];
        }
        for (std::size_t n = 0; n < rows; ++n) {
            const Real* vr = vs.data() + off + n * width;
            Real* orow = out.data() + off + n * width;
            for (std::size_t m = 0; m < k_delay; ++m) {
                const Real w = weights[b * k_delay + m];
                const std::size_t tau = taus[b * k_delay + m];
                for (std::size_t t = 0; t < width; ++t) orow[t] += w * vr[(t + tau) % width];
            }
        }
        if (delays) delays->push_back(std::move(sel));
    }

    return Tensor::make_result(
        "intra_attention", q.shape(), std::move(out), {q, k, v},
        [batch, rows, width, k_delay, taus = std::move(taus), weights = std::move(weights)](nn::TensorImpl& res) {
            auto& qi = *res.parents[0];
            auto& ki = *res.parents[1];
            auto& vi = *res.parents[2];
            Real* gq = qi.requires_grad ? qi.grad_buffer().data() : nullptr;
            Real* gk = ki.requires_grad ? ki.grad_buffer().data() : nullptr;
            Real* gv = vi.requires_grad ? vi.grad_buffer().data() : nullptr;
            const Real norm = Real(1) / static_cast<Real>(rows * width);
            std::vector<Real> gw(k_delay);
            for (std::size_t b = 0; b < batch; ++b) {
                const std::size_t off = b * rows * width;
                const Real* w = weights.data() + b * k_delay;
                const std::size_t* tb = taus.data() + b * k_delay;
                std::fill(gw.begin(), gw.end(), Real{0});
                for (std::size_t n = 0; n < rows; ++n) {
                    const std::size_t ro = off + n * width;
                    for (std::size_t m = 0; m < k_delay; ++m) {
                        double acc = 0.0;
                        for (std::size_t t = 0; t < width; ++t) {
                            const std::size_t s = (t + tb[m]) % width;
                            acc += static_cast<double>(res.grad[ro + t]) * vi.data[ro + s];
                            if (gv) gv[ro + s] += w[m] * res.grad[ro + t];
                        }
                        gw[m] += static_cast<Real>(acc);
                    }
                }
                if (!gq && !gk) continue;
                Real dot = 0;
                for (std::size_t m = 0; m < k_delay; ++m) dot += w[m] * gw[m];
                for (std::size_t m = 0; m < k_delay; ++m) {
                    const Real gs = w[m] * (gw[m] - dot) * norm;
                    if (gs == 0) continue;
                    for (std::size_t n = 0; n < rows; ++n) {
                        const std::size_t ro = off + n * width;
                        for (std::size_t t = 0; t < width; ++t) {
                            const std::size_t s = (t + tb[m]) % width;
                            if (gq) gq[ro + s] += gs * ki.data[ro + t];
                            if (gk) gk[ro + t] += gs * qi.data[ro + s];
                        }
                    }
                }
            }
        });
}

Tensor fuse_attention(const Tensor& x, const std::optional<Tensor>& inter, const std::optional<Tensor>& intra,
                      double sigma, double varsigma) {
    Tensor gamma = x;
    if (inter) {
        require_same(x, *inter, "fuse_attention");
        gamma = nn::add(gamma, nn::scale(*inter, static_cast<Real>(sigma)));
    }
    if (intra) {
        require_same(x, *intra, "fuse_attention");
        gamma = nn::add(gamma, nn::scale(*intra, static_cast<Real>(varsigma)));
    }
    return gamma;
}

Tensor ffn_forward(const Tensor& gamma, const Affine& first, const Affine& second) {
    return second(nn::relu(first(gamma)));
}

Tensor branch_pool(const Tensor& e) {
    if (e.rank() != 2 && e.rank() != 3) {
        throw DimensionError("branch_pool: expected [N, d] or [B, N, d], got " + nn::shape_str(e.shape()));
    }
    const Tensor t = nn::transpose_last2(e);
    return nn::mean(t, t.rank() - 1);
}

FusionOutput adaptive_fusion(std::span<const Tensor> pooled, const Tensor& w1, const Tensor& w2) {
    const std::size_t k = pooled.size();
    if (k == 0) throw DimensionError("adaptive_fusion: no branches");
    if (w1.rank() != 2 || w2.rank() != 2 || w1.dim(0) != k || w2.dim(1) != k || w1.dim(1) != w2.dim(0)) {
        throw DimensionError("adaptive_fusion: weights " + nn::shape_str(w1.shape()) + " and " +
                             nn::shape_str(w2.shape()) + " do not match " + std::to_string(k) + " branches");
    }
    const bool single = pooled.front().rank() == 1;
    std::vector<Tensor> rows;
    rows.reserve(k);
    for (const Tensor& g : pooled) {
        if (g.rank() != pooled.front().rank() || (!single && g.dim(0) != pooled.front().dim(0))) {
            throw DimensionError("adaptive_fusion: branch outputs disagree in batch shape");
        }
        const Tensor g2 = single ? nn::reshape(g, {1, g.dim(0)}) : g;
        rows.push_back(g2);
    }
    const std::size_t batch = rows.front().dim(0);
    std::vector<Tensor> stats;
    stats.reserve(k);
    for (const Tensor& g : rows) stats.push_back(nn::reshape(nn::mean(g, 1), {batch, 1}));
    const Tensor s = nn::concat_last(stats);  // [B, k]
    const Tensor w = nn::sigmoid(nn::matmul(nn::selu(nn::matmul(s, w1)), w2));
    std::vector<Tensor> weighted;
    weighted.reserve(k);
    for (std::size_t i = 0; i < k; ++i) weighted.push_back(nn::scale_rows(rows[i], nn::slice_last(w, i, 1)));
    Tensor fused = nn::concat_last(weighted);
    if (single) {
        return {nn::reshape(fused, {fused.dim(1)}), nn::reshape(w, {k})};
    }
    return {fused, w};
}

Tensor classifier_forward(const Tensor& v, std::span<const Affine> layers, Real dropout, Rng& rng, bool training) {
    if (layers.empty()) throw ConfigError("classifier_forward: no layers");
    const std::size_t in = layers.front().weight.dim(0);
    if (v.shape().back() != in) {
        throw DimensionError("classifier_forward: input width " + std::to_string(v.shape().back()) +
                             " does not match " + std::to_string(in));
    }
    Tensor h = v;
    for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
        h = nn::dropout(nn::selu(layers[i](h)), dropout, rng, training);
    }
    return layers.back()(h);
}

}  // namespace RFF_NN_ABI
}  // namespace rff::model
