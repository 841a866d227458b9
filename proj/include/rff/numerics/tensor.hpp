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

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rff/numerics/real.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;

/// Backward rule of one recorded op. Reads out.grad and accumulates into the
/// grads of the op's inputs.
using BackwardFn = std::function<void(TensorImpl& out)>;

/// Storage plus the computation record that produced it (if any).
struct TensorImpl {
    Shape shape;
    std::vector<Real> data;
    std::vector<Real> grad;  // empty until first touched by backward
    bool requires_grad = false;

    // Computation record. Leaves have no parents and no backward rule.
    const char* op = "leaf";
    std::vector<std::shared_ptr<TensorImpl>> parents;
    BackwardFn backward;

    bool is_leaf() const { return !backward; }
    /// Returns the grad buffer, allocating zeros on first use.
    std::vector<Real>& grad_buffer();
};

/// Shared handle to a dense row-major tensor.
///
/// Copies alias the same storage. Values are fixed after construction except
/// through mutable_data(), which is reserved for optimizer updates and
/// initialization of leaf parameters.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, Real value, bool requires_grad = false);
    /// Throws DimensionError on size mismatch and NumericalError on non-finite values.
    static Tensor from(Shape shape, std::vector<Real> values, bool requires_grad = false);
    static Tensor scalar(Real value, bool requires_grad = false);

    /// Records the result of a differentiable op. When gradients are disabled
    /// or no parent requires them, the record is dropped.
    static Tensor make_result(const char* op, Shape shape, std::vector<Real> values,
                              std::vector<Tensor> parents, BackwardFn backward);

    bool defined() const { return static_cast<bool>(impl_); }
    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
    std::size_t numel() const { return impl_->data.size(); }

    std::span<const Real> data() const { return impl_->data; }
    std::span<Real> mutable_data() { return impl_->data; }
    Real item() const;
    Real at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool on) { impl_->requires_grad = on; }
    bool has_grad() const { return !impl_->grad.empty(); }
    /// Gradient values; all zeros if backward never reached this tensor.
    std::vector<Real> grad() const;
    void zero_grad() { impl_->grad.clear(); }
    const char* op() const { return impl_->op; }

    /// Same values, no computation record.
    Tensor detach() const;
    Tensor clone() const;

    TensorImpl& impl() const { return *impl_; }
    const std::shared_ptr<TensorImpl>& impl_ptr() const { return impl_; }

private:
    std::shared_ptr<TensorImpl> impl_;
};

/// Back-propagates from a scalar loss. Leaf grads accumulate across calls;
/// intermediate grads are reset at the start of each call.
void backward(const Tensor& loss);

bool grad_enabled();

/// Disables recording of computation records for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
