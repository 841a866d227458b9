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
#include <string_view>

#include "rff/common/rng.hpp"
#include "rff/numerics/tensor.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

enum class Activation { relu, selu, sigmoid };

/// Parses "relu", "selu" or "sigmoid"; anything else is a ConfigError.
Activation parse_activation(std::string_view name);

// SELU constants (Klambauer et al.).
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;

Tensor apply_activation(const Tensor& x, Activation kind);
Tensor relu(const Tensor& x);
Tensor selu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

/// a + b where b's shape equals a trailing suffix of a's shape (bias and
/// positional-table broadcasting). No other broadcasting is supported.
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, Real factor);
/// x[..., j] * s[..., 0]: one scalar per row. s has x's shape with last extent 1.
Tensor scale_rows(const Tensor& x, const Tensor& s);

/// [..., m, k] x [k, n] or batched [B, m, k] x [B, k, n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// a x b^T for [m, k] x [n, k] or batched [B, m, k] x [B, n, k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose_last2(const Tensor& x);

/// y = x W + b with W of shape [d_in, d_out] and b of shape [d_out].
Tensor linear(const Tensor& x, const Tensor& weight, const std::optional<Tensor>& bias);

/// Normalizes over the last axis, then applies gain and bias (both [d]).
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps = Real(1e-5));

/// Mean over `axis`; the axis is removed from the shape.
Tensor mean(const Tensor& x, std::size_t axis);
/// Sum of all elements as a scalar.
Tensor sum(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
Tensor concat_last(std::span<const Tensor> parts);
Tensor slice_last(const Tensor& x, std::size_t start, std::size_t length);

/// Inverted dropout: identity when !training or rate == 0.
Tensor dropout(const Tensor& x, Real rate, Rng& rng, bool training);

/// Mean softmax cross-entropy of logits [B, C] against integer labels.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Number of learnable scalars in a d_in -> d_out affine map.
constexpr std::size_t affine_param_count(std::size_t d_in, std::size_t d_out) {
    return d_in * d_out + d_out;
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
