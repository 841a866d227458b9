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

#include "rff/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rff/common/error.hpp"
#include "rff/common/rng.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

GradCheckOptions default_gradcheck_options() {
    if constexpr (sizeof(Real) == sizeof(double)) {
        return {1e-5, 1e-4};
    } else {
        return {1e-3, 1e-2};
    }
}

GradCheckResult check_gradients(const std::string& name, const std::function<Tensor()>& loss_fn,
                                std::span<Tensor> inputs, const GradCheckOptions& options) {
    for (auto& t : inputs) {
        if (!t.requires_grad()) {
            throw ConfigError("check_gradients(" + name + "): input does not require grad");
        }
        t.zero_grad();
    }
    backward(loss_fn());
    std::vector<std::vector<Real>> analytic;
    for (auto& t : inputs) {
        analytic.push_back(t.grad());
    }

    NoGradGuard no_grad;
    Rng rng(options.seed);
    double diff_sq = 0, ana_sq = 0, num_sq = 0, max_abs = 0;
    std::size_t probed = 0;
    const Real eps = static_cast<Real>(options.eps);
    for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
        auto values = inputs[ti].mutable_data();
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (options.max_elements_per_tensor > 0 && idx.size() > options.max_elements_per_tensor) {
            // Partial Fisher-Yates: a seeded sample without replacement.
            for (std::size_t i = 0; i < options.max_elements_per_tensor; ++i) {
                std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
            }
            idx.resize(options.max_elements_per_tensor);
        }
        for (std::size_t j : idx) {
            const Real saved = values[j];
            values[j] = saved + eps;
            const double plus = loss_fn().item();
            values[j] = saved - eps;
            const double minus = loss_fn().item();
            values[j] = saved;
            const double numeric = (plus - minus) / (2.0 * static_cast<double>(eps));
            const double a = analytic[ti][j];
            diff_sq += (a - numeric) * (a - numeric);
            ana_sq += a * a;
            num_sq += numeric * numeric;
            max_abs = std::max(max_abs, std::abs(a - numeric));
            ++probed;
        }
    }
    GradCheckResult result;
    result.name = name;
    result.probed = probed;
    result.max_abs_error = max_abs;
    const double denom = std::sqrt(std::max(ana_sq, num_sq));
    result.relative_error = denom > 0 ? std::sqrt(diff_sq) / denom : 0.0;
    result.passed = std::isfinite(result.relative_error) && result.relative_error < options.tolerance;
    return result;
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
