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

#include "rff/numerics/optim.hpp"

#include <cmath>
#include <string>

#include "rff/common/error.hpp"

namespace rff::nn {
inline namespace RFF_NN_ABI {

void adamw_step(std::span<Tensor> params, OptimizerState& state, double lr, const AdamWConfig& cfg) {
    if (lr < 0) {
        throw ConfigError("adamw_step: negative learning rate");
    }
    if (!state.initialized()) {
        if (state.step != 0) {
            throw ConfigError("adamw_step: state has a step count but no moment buffers");
        }
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.numel(), Real{0});
            state.second_moment.emplace_back(p.numel(), Real{0});
        }
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw ConfigError("adamw_step: optimizer state holds " + std::to_string(state.first_moment.size()) +
                          " parameters, model has " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.first_moment[i].size() != params[i].numel() ||
            state.second_moment[i].size() != params[i].numel()) {
            throw DimensionError("adamw_step: moment buffer " + std::to_string(i) +
                                 " does not match parameter shape " + shape_str(params[i].shape()));
        }
    }

    state.step += 1;
    const double t = static_cast<double>(state.step);
    const Real b1 = static_cast<Real>(cfg.beta1);
    const Real b2 = static_cast<Real>(cfg.beta2);
    const Real bias1 = static_cast<Real>(1.0 - std::pow(cfg.beta1, t));
    const Real bias2 = static_cast<Real>(1.0 - std::pow(cfg.beta2, t));
    const Real step_lr = static_cast<Real>(lr);
    const Real decay = static_cast<Real>(1.0 - lr * cfg.weight_decay);
    const Real eps = static_cast<Real>(cfg.eps);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto values = params[i].mutable_data();
        const auto& grad = params[i].impl().grad;
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        for (std::size_t j = 0; j < values.size(); ++j) {
            const Real g = grad.empty() ? Real{0} : grad[j];
            values[j] *= decay;
            m[j] = b1 * m[j] + (Real{1} - b1) * g;
            v[j] = b2 * v[j] + (Real{1} - b2) * g * g;
            const Real m_hat = m[j] / bias1;
            const Real v_hat = v[j] / bias2;
            values[j] -= step_lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn
