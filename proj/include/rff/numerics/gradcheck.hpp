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

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "rff/numerics/tensor.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

struct GradCheckOptions {
    double eps;
    double tolerance;
    /// Elements probed per input tensor; 0 probes all of them.
    std::size_t max_elements_per_tensor = 0;
    std::uint64_t seed = 7;
};

/// eps 1e-3 / tolerance 1e-2 in 32-bit builds, eps 1e-5 / tolerance 1e-4 in 64-bit builds.
GradCheckOptions default_gradcheck_options();

struct GradCheckResult {
    std::string name;
    /// ||analytic - numeric||_2 / max(||analytic||_2, ||numeric||_2) over all probed elements.
    double relative_error = 0;
    double max_abs_error = 0;
    std::size_t probed = 0;
    bool passed = false;
};

/// Compares backward() against central finite differences of a scalar loss.
/// `inputs` must be leaves with requires_grad set; their values are restored.
GradCheckResult check_gradients(const std::string& name, const std::function<Tensor()>& loss_fn,
                                std::span<Tensor> inputs, const GradCheckOptions& options);

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
