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

#include "rff/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rff/common/error.hpp"
#include "rff/common/parallel.hpp"
#include "rff/numerics/kernels.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {
namespace {

/// Grad buffer of parent i, or nullptr if that parent does not need one.
Real* parent_grad(TensorImpl& out, std::size_t i) {
    auto& p = *out.parents[i];
    return p.requires_grad ? p.grad_buffer().data() : nullptr;
}

const std::vector<Real>& parent_data(const TensorImpl& out, std::size_t i) {
    return out.parents[i]->data;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()) + " differ");
    }
}

template <typename Fwd, typename Deriv>
Tensor unary(const char* name, const Tensor& x, Fwd fwd, Deriv deriv) {
    std::vector<Real> y(x.numel());
    const auto xs = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = fwd(xs[i]);
    }
    return Tensor::make_result(name, x.shape(), std::move(y), {x}, [deriv](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) {
            return;
        }
        const auto& xv = parent_data(out, 0);
        for (std::size_t i = 0; i < out.grad.size(); ++i) {
            gx[i] += out.grad[i] * deriv(xv[i], out.data[i]);
        }
    });
}

}  // namespace

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "selu") return Activation::selu;
    if (name == "sigmoid") return Activation::sigmoid;
    throw ConfigError("unknown activation '" + std::string(name) + "' (expected relu, selu or sigmoid)");
}

Tensor apply_activation(const Tensor& x, Activation kind) {
    switch (kind) {
        case Activation::relu: return relu(x);
        case Activation::selu: return selu(x);
        case Activation::sigmoid: return sigmoid(x);
    }
    throw ConfigError("unknown activation kind");
}

Tensor relu(const Tensor& x) {
    return unary(
        "relu", x, [](Real v) { return v > 0 ? v : Real{0}; },
        [](Real v, Real) { return v > 0 ? Real{1} : Real{0}; });
}

Tensor selu(const Tensor& x) {
    constexpr Real lambda = static_cast<Real>(kSeluLambda);
    constexpr Real la = static_cast<Real>(kSeluLambda * kSeluAlpha);
    return unary(
        "selu", x, [](Real v) { return v > 0 ? lambda * v : la * std::expm1(v); },
        [](Real v, Real y) { return v > 0 ? lambda : y + la; });
}

Tensor sigmoid(const Tensor& x) {
    return unary(
        "sigmoid", x,
        [](Real v) {
            if (v >= 0) {
                return Real{1} / (Real{1} + std::exp(-v));
            }
            const Real e = std::exp(v);
            return e / (Real{1} + e);
        },
        [](Real, Real y) { return y * (Real{1} - y); });
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                             shape_str(x.shape()));
    }
    const std::size_t n = x.dim(axis);
    if (n == 0) {
        throw DimensionError("softmax: empty axis");
    }
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

    const auto xs = x.data();
    std::vector<Real> y(x.numel());
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            Real mx = -std::numeric_limits<Real>::infinity();
            for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, xs[base + j * inner]);
            Real total = 0;
            for (std::size_t j = 0; j < n; ++j) {
                const Real e = std::exp(xs[base + j * inner] - mx);
                y[base + j * inner] = e;
                total += e;
            }
            const Real inv = Real{1} / total;
            for (std::size_t j = 0; j < n; ++j) y[base + j * inner] *= inv;
        }
    }
    return Tensor::make_result("softmax", x.shape(), std::move(y), {x},
                               [outer, inner, n](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) return;
        const auto& y = out.data;
        const auto& g = out.grad;
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t in = 0; in < inner; ++in) {
                const std::size_t base = o * n * inner + in;
                Real dot = 0;
                for (std::size_t j = 0; j < n; ++j) dot += g[base + j * inner] * y[base + j * inner];
                for (std::size_t j = 0; j < n; ++j) {
                    const std::size_t idx = base + j * inner;
                    gx[idx] += y[idx] * (g[idx] - dot);
                }
            }
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    const auto& sa = a.shape();
    const auto& sb = b.shape();
    if (sb.size() > sa.size() || !std::equal(sb.begin(), sb.end(), sa.end() - sb.size())) {
        throw DimensionError("add: shape " + shape_str(sb) + " is not a suffix of " + shape_str(sa));
    }
    const std::size_t inner = b.numel();
    const std::size_t reps = inner == 0 ? 0 : a.numel() / inner;
    std::vector<Real> y(a.data().begin(), a.data().end());
    const auto bs = b.data();
    for (std::size_t r = 0; r < reps; ++r) {
        Real* row = y.data() + r * inner;
        for (std::size_t j = 0; j < inner; ++j) row[j] += bs[j];
    }
    return Tensor::make_result("add", sa, std::move(y), {a, b}, [reps, inner](TensorImpl& out) {
        const auto& g = out.grad;
        if (Real* ga = parent_grad(out, 0)) {
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        }
        if (Real* gb = parent_grad(out, 1)) {
            for (std::size_t r = 0; r < reps; ++r) {
                const Real* row = g.data() + r * inner;
                for (std::size_t j = 0; j < inner; ++j) gb[j] += row[j];
            }
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    std::vector<Real> y(a.numel());
    const auto as = a.data();
    const auto bs = b.data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = as[i] * bs[i];
    return Tensor::make_result("mul", a.shape(), std::move(y), {a, b}, [](TensorImpl& out) {
        const auto& g = out.grad;
        const auto& av = parent_data(out, 0);
        const auto& bv = parent_data(out, 1);
        if (Real* ga = parent_grad(out, 0)) {
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (Real* gb = parent_grad(out, 1)) {
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Tensor scale(const Tensor& x, Real factor) {
    std::vector<Real> y(x.data().begin(), x.data().end());
    for (auto& v : y) v *= factor;
    return Tensor::make_result("scale", x.shape(), std::move(y), {x}, [factor](TensorImpl& out) {
        if (Real* gx = parent_grad(out, 0)) {
            for (std::size_t i = 0; i < out.grad.size(); ++i) gx[i] += out.grad[i] * factor;
        }
    });
}

Tensor scale_rows(const Tensor& x, const Tensor& s) {
    if (x.rank() == 0) {
        throw DimensionError("scale_rows: scalar input");
    }
    Shape expect = x.shape();
    expect.back() = 1;
    if (s.shape() != expect) {
        throw DimensionError("scale_rows: scale shape " + shape_str(s.shape()) + " must be " +
                             shape_str(expect));
    }
    const std::size_t d = x.shape().back();
    const std::size_t rows = s.numel();
    std::vector<Real> y(x.numel());
    const auto xs = x.data();
    const auto ss = s.data();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < d; ++j) y[r * d + j] = xs[r * d + j] * ss[r];
    }
    return Tensor::make_result("scale_rows", x.shape(), std::move(y), {x, s},
                               [rows, d](TensorImpl& out) {
        const auto& g = out.grad;
        const auto& xv = parent_data(out, 0);
        const auto& sv = parent_data(out, 1);
        if (Real* gx = parent_grad(out, 0)) {
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t j = 0; j < d; ++j) gx[r * d + j] += g[r * d + j] * sv[r];
        }
        if (Real* gs = parent_grad(out, 1)) {
            for (std::size_t r = 0; r < rows; ++r) {
                Real acc = 0;
                for (std::size_t j = 0; j < d; ++j) acc += g[r * d + j] * xv[r * d + j];
                gs[r] += acc;
            }
        }
    });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() < 2 || b.rank() < 2 || b.rank() > 3 || (b.rank() == 3 && a.rank() != 3)) {
        throw DimensionError("matmul: unsupported shapes " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    const std::size_t k = a.shape().back();
    const std::size_t kb = b.dim(b.rank() - 2);
    if (k != kb || (b.rank() == 3 && a.dim(0) != b.dim(0))) {
        throw DimensionError("matmul: inner extents disagree for " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
    }
    const std::size_t n = b.shape().back();
    Shape out_shape = a.shape();
    out_shape.back() = n;

    if (b.rank() == 2) {
        // Shared right operand: fold all leading axes of a into rows.
        const std::size_t m = a.numel() / std::max<std::size_t>(k, 1);
        std::vector<Real> y(m * n, Real{0});
        kernels::gemm_nn(a.data().data(), b.data().data(), y.data(), m, k, n);
        return Tensor::make_result("matmul", std::move(out_shape), std::move(y), {a, b},
                                   [m, k, n](TensorImpl& out) {
            const Real* g = out.grad.data();
            if (Real* ga = parent_grad(out, 0)) {
                kernels::gemm_nt(g, parent_data(out, 1).data(), ga, m, n, k);
            }
            if (Real* gb = parent_grad(out, 1)) {
                kernels::gemm_tn(parent_data(out, 0).data(), g, gb, m, k, n);
            }
        });
    }

    const std::size_t batch = a.dim(0);
    const std::size_t m = a.dim(1);
    std::vector<Real> y(batch * m * n, Real{0});
    for (std::size_t bi = 0; bi < batch; ++bi) {
        kernels::gemm_nn(a.data().data() + bi * m * k, b.data().data() + bi * k * n,
                         y.data() + bi * m * n, m, k, n);
    }
    return Tensor::make_result("bmm", std::move(out_shape), std::move(y), {a, b},
                               [batch, m, k, n](TensorImpl& out) {
        const Real* g = out.grad.data();
        const auto& av = parent_data(out, 0);
        const auto& bv = parent_data(out, 1);
        Real* ga = parent_grad(out, 0);
        Real* gb = parent_grad(out, 1);
        for (std::size_t bi = 0; bi < batch; ++bi) {
            if (ga) kernels::gemm_nt(g + bi * m * n, bv.data() + bi * k * n, ga + bi * m * k, m, n, k);
            if (gb) kernels::gemm_tn(av.data() + bi * m * k, g + bi * m * n, gb + bi * k * n, m, k, n);
        }
    });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    const bool batched = a.rank() == 3;
    if ((a.rank() != 2 && a.rank() != 3) || b.rank() != a.rank() ||
        a.shape().back() != b.shape().back() || (batched && a.dim(0) != b.dim(0))) {
        throw DimensionError("matmul_nt: incompatible shapes " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()) + "^T");
    }
    const std::size_t batch = batched ? a.dim(0) : 1;
    const std::size_t m = a.dim(a.rank() - 2);
    const std::size_t n = b.dim(b.rank() - 2);
    const std::size_t k = a.shape().back();
    Shape out_shape = batched ? Shape{batch, m, n} : Shape{m, n};
    std::vector<Real> y(batch * m * n, Real{0});
    for (std::size_t bi = 0; bi < batch; ++bi) {
        kernels::gemm_nt(a.data().data() + bi * m * k, b.data().data() + bi * n * k,
                         y.data() + bi * m * n, m, k, n);
    }
    return Tensor::make_result("matmul_nt", std::move(out_shape), std::move(y), {a, b},
                               [batch, m, k, n](TensorImpl& out) {
        const Real* g = out.grad.data();
        const auto& av = parent_data(out, 0);
        const auto& bv = parent_data(out, 1);
        Real* ga = parent_grad(out, 0);
        Real* gb = parent_grad(out, 1);
        for (std::size_t bi = 0; bi < batch; ++bi) {
            // y = a b^T: da = g b, db = g^T a
            if (ga) kernels::gemm_nn(g + bi * m * n, bv.data() + bi * n * k, ga + bi * m * k, m, n, k);
            if (gb) kernels::gemm_tn(g + bi * m * n, av.data() + bi * m * k, gb + bi * n * k, m, n, k);
        }
    });
}

Tensor transpose_last2(const Tensor& x) {
    if (x.rank() < 2) {
        throw DimensionError("transpose_last2: rank < 2 for shape " + shape_str(x.shape()));
    }
    const std::size_t r = x.dim(x.rank() - 2);
    const std::size_t c = x.dim(x.rank() - 1);
    const std::size_t batch = x.numel() / std::max<std::size_t>(r * c, 1);
    Shape out_shape = x.shape();
    std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
    std::vector<Real> y(x.numel());
    const auto xs = x.data();
    for (std::size_t bi = 0; bi < batch; ++bi)
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) y[bi * r * c + j * r + i] = xs[bi * r * c + i * c + j];
    return Tensor::make_result("transpose", std::move(out_shape), std::move(y), {x},
                               [batch, r, c](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) return;
        for (std::size_t bi = 0; bi < batch; ++bi)
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j)
                    gx[bi * r * c + i * c + j] += out.grad[bi * r * c + j * r + i];
    });
}

Tensor linear(const Tensor& x, const Tensor& weight, const std::optional<Tensor>& bias) {
    if (weight.rank() != 2 || x.rank() == 0 || x.shape().back() != weight.dim(0)) {
        throw DimensionError("linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                             shape_str(weight.shape()));
    }
    Tensor y = matmul(x, weight);
    if (bias) {
        if (bias->shape() != Shape{weight.dim(1)}) {
            throw DimensionError("linear: bias " + shape_str(bias->shape()) + " incompatible with weight " +
                                 shape_str(weight.shape()));
        }
        y = add(y, *bias);
    }
    return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, Real eps) {
    if (x.rank() == 0) throw DimensionError("layer_norm: scalar input");
    const std::size_t d = x.shape().back();
    if (gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
        throw DimensionError("layer_norm: gain/bias " + shape_str(gain.shape()) + "/" +
                             shape_str(bias.shape()) + " do not match width " + std::to_string(d));
    }
    const std::size_t rows = x.numel() / std::max<std::size_t>(d, 1);
    const auto xs = x.data();
    const auto gs = gain.data();
    const auto bs = bias.data();
    std::vector<Real> y(x.numel());
    std::vector<Real> xhat(x.numel());
    std::vector<Real> inv_std(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const Real* row = xs.data() + r * d;
        Real mu = 0;
        for (std::size_t j = 0; j < d; ++j) mu += row[j];
        mu /= static_cast<Real>(d);
        Real var = 0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
        var /= static_cast<Real>(d);
        const Real inv = Real{1} / std::sqrt(var + eps);
        inv_std[r] = inv;
        for (std::size_t j = 0; j < d; ++j) {
            const Real h = (row[j] - mu) * inv;
            xhat[r * d + j] = h;
            y[r * d + j] = h * gs[j] + bs[j];
        }
    }
    return Tensor::make_result("layer_norm", x.shape(), std::move(y), {x, gain, bias},
                               [rows, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](TensorImpl& out) {
        const auto& g = out.grad;
        const auto& gv = parent_data(out, 1);
        Real* gx = parent_grad(out, 0);
        Real* gg = parent_grad(out, 1);
        Real* gb = parent_grad(out, 2);
        const Real dn = static_cast<Real>(d);
        for (std::size_t r = 0; r < rows; ++r) {
            const Real* gr = g.data() + r * d;
            const Real* hr = xhat.data() + r * d;
            if (gg || gb) {
                for (std::size_t j = 0; j < d; ++j) {
                    if (gg) gg[j] += gr[j] * hr[j];
                    if (gb) gb[j] += gr[j];
                }
            }
            if (gx) {
                Real sum_dh = 0, sum_dh_h = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    const Real dh = gr[j] * gv[j];
                    sum_dh += dh;
                    sum_dh_h += dh * hr[j];
                }
                const Real c = inv_std[r] / dn;
                for (std::size_t j = 0; j < d; ++j) {
                    const Real dh = gr[j] * gv[j];
                    gx[r * d + j] += c * (dn * dh - sum_dh - hr[j] * sum_dh_h);
                }
            }
        }
    });
}

Tensor mean(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw DimensionError("mean: axis " + std::to_string(axis) + " invalid for shape " +
                             shape_str(x.shape()));
    }
    const std::size_t n = x.dim(axis);
    if (n == 0) throw DimensionError("mean: empty axis");
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= x.dim(i);
    for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.dim(i);
    Shape out_shape;
    for (std::size_t i = 0; i < x.rank(); ++i)
        if (i != axis) out_shape.push_back(x.dim(i));
    const auto xs = x.data();
    std::vector<Real> y(outer * inner, Real{0});
    const Real inv = Real{1} / static_cast<Real>(n);
    for (std::size_t o = 0; o < outer; ++o) {
        Real* yr = y.data() + o * inner;
        for (std::size_t j = 0; j < n; ++j) {
            const Real* xr = xs.data() + (o * n + j) * inner;
            for (std::size_t in = 0; in < inner; ++in) yr[in] += xr[in];
        }
        for (std::size_t in = 0; in < inner; ++in) yr[in] *= inv;
    }
    return Tensor::make_result("mean", std::move(out_shape), std::move(y), {x},
                               [outer, inner, n, inv](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) return;
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t in = 0; in < inner; ++in)
                    gx[(o * n + j) * inner + in] += out.grad[o * inner + in] * inv;
    });
}

Tensor sum(const Tensor& x) {
    Real total = 0;
    for (Real v : x.data()) total += v;
    return Tensor::make_result("sum", {}, {total}, {x}, [](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) return;
        const Real g = out.grad[0];
        const std::size_t n = out.parents[0]->data.size();
        for (std::size_t i = 0; i < n; ++i) gx[i] += g;
    });
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    }
    std::vector<Real> y(x.data().begin(), x.data().end());
    return Tensor::make_result("reshape", std::move(shape), std::move(y), {x}, [](TensorImpl& out) {
        if (Real* gx = parent_grad(out, 0)) {
            for (std::size_t i = 0; i < out.grad.size(); ++i) gx[i] += out.grad[i];
        }
    });
}

Tensor concat_last(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_last: no inputs");
    Shape lead = parts[0].shape();
    if (lead.empty()) throw DimensionError("concat_last: scalar input");
    lead.pop_back();
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const auto& p : parts) {
        Shape s = p.shape();
        if (s.empty()) throw DimensionError("concat_last: scalar input");
        widths.push_back(s.back());
        total += s.back();
        s.pop_back();
        if (s != lead) {
            throw DimensionError("concat_last: leading extents " + shape_str(p.shape()) + " vs " +
                                 shape_str(parts[0].shape()));
        }
    }
    const std::size_t rows = shape_numel(lead);
    std::vector<Real> y(rows * total);
    std::size_t offset = 0;
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const auto ps = parts[pi].data();
        const std::size_t w = widths[pi];
        for (std::size_t r = 0; r < rows; ++r)
            std::copy_n(ps.data() + r * w, w, y.data() + r * total + offset);
        offset += w;
    }
    Shape out_shape = lead;
    out_shape.push_back(total);
    std::vector<Tensor> parents(parts.begin(), parts.end());
    return Tensor::make_result("concat", std::move(out_shape), std::move(y), std::move(parents),
                               [rows, total, widths](TensorImpl& out) {
        std::size_t off = 0;
        for (std::size_t pi = 0; pi < widths.size(); ++pi) {
            const std::size_t w = widths[pi];
            if (Real* gp = parent_grad(out, pi)) {
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t j = 0; j < w; ++j) gp[r * w + j] += out.grad[r * total + off + j];
            }
            off += w;
        }
    });
}

Tensor slice_last(const Tensor& x, std::size_t start, std::size_t length) {
    if (x.rank() == 0 || start + length > x.shape().back()) {
        throw DimensionError("slice_last: [" + std::to_string(start) + ", " +
                             std::to_string(start + length) + ") out of range for " + shape_str(x.shape()));
    }
    const std::size_t w = x.shape().back();
    const std::size_t rows = x.numel() / std::max<std::size_t>(w, 1);
    Shape out_shape = x.shape();
    out_shape.back() = length;
    std::vector<Real> y(rows * length);
    const auto xs = x.data();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(xs.data() + r * w + start, length, y.data() + r * length);
    return Tensor::make_result("slice", std::move(out_shape), std::move(y), {x},
                               [rows, w, start, length](TensorImpl& out) {
        Real* gx = parent_grad(out, 0);
        if (!gx) return;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < length; ++j) gx[r * w + start + j] += out.grad[r * length + j];
    });
}

Tensor dropout(const Tensor& x, Real rate, Rng& rng, bool training) {
    if (rate < 0 || rate >= 1) {
        throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (!training || rate == 0) {
        return x;
    }
    const Real keep_scale = Real{1} / (Real{1} - rate);
    std::vector<Real> mask(x.numel());
    for (auto& m : mask) m = rng.uniform() < rate ? Real{0} : keep_scale;
    std::vector<Real> y(x.numel());
    const auto xs = x.data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = xs[i] * mask[i];
    return Tensor::make_result("dropout", x.shape(), std::move(y), {x},
                               [mask = std::move(mask)](TensorImpl& out) {
        if (Real* gx = parent_grad(out, 0)) {
            for (std::size_t i = 0; i < mask.size(); ++i) gx[i] += out.grad[i] * mask[i];
        }
    });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
    if (logits.rank() != 2 || logits.dim(0) != labels.size() || logits.dim(0) == 0) {
        throw DimensionError("cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                             std::to_string(labels.size()) + " labels");
    }
    const std::size_t batch = logits.dim(0);
    const std::size_t classes = logits.dim(1);
    const auto zs = logits.data();
    std::vector<Real> probs(batch * classes);
    std::vector<int> targets(labels.begin(), labels.end());
    double total = 0;
    for (std::size_t b = 0; b < batch; ++b) {
        if (targets[b] < 0 || static_cast<std::size_t>(targets[b]) >= classes) {
            throw DimensionError("cross_entropy: label " + std::to_string(targets[b]) + " outside [0, " +
                                 std::to_string(classes) + ")");
        }
        const Real* z = zs.data() + b * classes;
        const Real mx = *std::max_element(z, z + classes);
        Real s = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            probs[b * classes + c] = std::exp(z[c] - mx);
            s += probs[b * classes + c];
        }
        for (std::size_t c = 0; c < classes; ++c) probs[b * classes + c] /= s;
        total += static_cast<double>(std::log(s) + mx - z[targets[b]]);
    }
    const Real loss = static_cast<Real>(total / static_cast<double>(batch));
    return Tensor::make_result("cross_entropy", {}, {loss}, {logits},
                               [batch, classes, probs = std::move(probs),
                                targets = std::move(targets)](TensorImpl& out) {
        Real* gz = parent_grad(out, 0);
        if (!gz) return;
        const Real g = out.grad[0] / static_cast<Real>(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t c = 0; c < classes; ++c) {
                const Real onehot = static_cast<int>(c) == targets[b] ? Real{1} : Real{0};
                gz[b * classes + c] += g * (probs[b * classes + c] - onehot);
            }
        }
    });
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
