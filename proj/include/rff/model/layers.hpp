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

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rff/common/rng.hpp"
#include "rff/numerics/tensor.hpp"
#include "rff/signal/iq_signal.hpp"

namespace rff::model {
inline namespace RFF_NN_ABI {

using nn::Real;
using nn::Tensor;

/// Affine map y = x W + b, W of shape [d_in, d_out]; bias may be undefined.
struct Affine {
    Tensor weight;
    Tensor bias;

    Tensor operator()(const Tensor& x) const;
};

struct NormParams {
    Tensor gain;
    Tensor bias;
};

/// Periodic embedding of one signal: [N, 2p] with N = ceil(L / p). Each
/// channel is zero-padded to N*p and cut into period rows; row n is
/// [I period n | Q period n].
Tensor periodic_embed(const signal::IQSignal& x, std::size_t period);
/// Batched form: [B, N, 2p]. All signals must share one length.
Tensor periodic_embed(std::span<const signal::IQSignal* const> batch, std::size_t period);

/// Sinusoidal table [rows, width]: even columns sin(pos / 10000^(2i/width)),
/// odd columns the matching cos.
Tensor positional_encoding(std::size_t rows, std::size_t width);

/// Period-delay attention across rows. Per head h with row slice width d_h:
/// softmax_rows(Q_h K_h^T / d_h) V_h; heads are concatenated. Inputs [N, d]
/// or [B, N, d]. No output projection is applied here.
Tensor inter_period_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t n_heads = 1);

enum class CorrelationPath { direct, fft };

/// Row-averaged circular cross-correlation along the feature axis:
///   c[tau] = 1/(N d) * sum_n sum_t q[n, (t + tau) mod d] * k[n, t]
/// Returns [d] for [N, d] inputs or [B, d] for [B, N, d]. Only the direct path
/// records gradients.
Tensor intra_period_correlation(const Tensor& q, const Tensor& k, CorrelationPath path);

/// out[t] = v[(t + shift) mod d]
std::vector<Real> roll(std::span<const Real> v, std::size_t shift);

/// Lags chosen by intra-period attention for one sample.
struct DelaySet {
    std::vector<std::size_t> taus;  // distinct, sorted by descending score
    std::vector<Real> scores;
};

/// Top-k lags of `curve` restricted to 1 <= tau < period (ties: smaller tau).
DelaySet select_delays(std::span<const Real> curve, std::size_t k_delay, std::size_t period);

/// Lag-aggregation attention: Sigma = sum_j softmax(scores)_j * Roll(V, tau_j),
/// with lags and scores from select_delays on the row-averaged correlation of
/// Q and K. Gradients reach V and, through the selected scores, Q and K; the
/// lag indices themselves are not differentiated.
Tensor intra_period_attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t k_delay,
                              std::size_t period, CorrelationPath path, std::vector<DelaySet>* delays = nullptr);

/// Gamma = X + sigma * Lambda + varsigma * Sigma. An absent term contributes nothing.
Tensor fuse_attention(const Tensor& x, const std::optional<Tensor>& inter, const std::optional<Tensor>& intra,
                      double sigma, double varsigma);

/// relu(Gamma W1 + b1) W2 + b2 with W1 [d, N] and W2 [N, d].
Tensor ffn_forward(const Tensor& gamma, const Affine& first, const Affine& second);

/// Transpose to [.., d, N] and average over N: [B, N, d] -> [B, d], [N, d] -> [d].
Tensor branch_pool(const Tensor& e);

struct FusionOutput {
    Tensor fused;    // [B, sum d_i]
    Tensor weights;  // [B, k]
};

/// Adaptive multi-period fusion. s_i is the mean of G_i; the branch weights are
/// sigmoid(selu(s W1) W2) with W1 [k, h] and W2 [h, k], and the output is the
/// concatenation of w_i * G_i. Inputs are [B, d_i] (or [d_i] for one sample).
FusionOutput adaptive_fusion(std::span<const Tensor> pooled, const Tensor& w1, const Tensor& w2);

/// Affine -> SELU -> dropout for every layer but the last, which is affine only.
Tensor classifier_forward(const Tensor& v, std::span<const Affine> layers, Real dropout, Rng& rng, bool training);

}  // namespace RFF_NN_ABI
}  // namespace rff::model
