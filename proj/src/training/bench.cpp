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

#include "rff/training/bench.hpp"

#include <algorithm>
#include <chrono>

#include "rff/common/error.hpp"
#include "rff/common/rng.hpp"
#include "rff/numerics/tensor.hpp"

namespace rff::training {

BenchResult bench_inference(const model::ModelParams& params, const model::ModelConfig& config, std::size_t batch,
                            std::size_t iters, std::uint64_t seed) {
    if (iters < 10) throw ConfigError("bench: iters must be >= 10");
    if (batch < 1) throw ConfigError("bench: batch must be >= 1");
    Rng rng(seed);
    std::vector<signal::IQSignal> signals(batch);
    for (auto& s : signals) {
        s.samples.resize(config.signal_length);
        for (auto& c : s.samples) c = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
    }
    std::vector<const signal::IQSignal*> ptrs;
    for (const auto& s : signals) ptrs.push_back(&s);

    nn::NoGradGuard no_grad;
    constexpr std::size_t kWarmup = 3;
    for (std::size_t i = 0; i < kWarmup; ++i) model::model_forward(ptrs, params, config);
    std::vector<double> ms(iters);
    for (auto& t : ms) {
        const auto start = std::chrono::steady_clock::now();
        model::model_forward(ptrs, params, config);
        t = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    BenchResult r;
    r.batch = batch;
    r.iters = iters;
    for (const double t : ms) r.mean_ms += t;
    r.mean_ms /= static_cast<double>(iters);
    std::sort(ms.begin(), ms.end());
    auto pct = [&](double q) {
        const auto idx = static_cast<std::size_t>(q * static_cast<double>(iters - 1) + 0.5);
        return ms[std::min(idx, iters - 1)];
    };
    r.p50_ms = pct(0.50);
    r.p95_ms = pct(0.95);
    r.macs = model::estimate_macs(config);
    r.mflops = 2.0 * static_cast<double>(r.macs) / 1e6;
    r.params_total = model::count_params(config, params).total;
    return r;
}

}  // namespace rff::training
