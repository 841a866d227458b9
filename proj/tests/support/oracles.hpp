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

// Scalar reference implementations of the attention blocks, written as plain
// loops in double precision so they share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rff::oracle {

// softmax(Q K^T / d) V for one [n, d] instance.
template <class T>
std::vector<double> inter_attention(std::span<const T> q, std::span<const T> k, std::span<const T> v, std::size_t n,
                                    std::size_t d) {
    std::vector<double> out(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> s(n);
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0;
            for (std::size_t c = 0; c < d; ++c) dot += double(q[i * d + c]) * double(k[j * d + c]);
            s[j] = dot / double(d);
        }
        const double mx = *std::max_element(s.begin(), s.end());
        double z = 0;
        for (auto& x : s) z += (x = std::exp(x - mx));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t c = 0; c < d; ++c) out[i * d + c] += s[j] / z * double(v[j * d + c]);
    }
    return out;
}

// Row-averaged circular correlation c[tau] = 1/(n d) sum q[r, (t + tau) % d] k[r, t].
template <class T>
std::vector<double> correlation(std::span<const T> q, std::span<const T> k, std::size_t n, std::size_t d) {
    std::vector<double> c(d, 0.0);
    for (std::size_t tau = 0; tau < d; ++tau) {
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t t = 0; t < d; ++t) c[tau] += double(q[r * d + (t + tau) % d]) * double(k[r * d + t]);
        c[tau] /= double(n * d);
    }
    return c;
}

// Lag choice, softmax over the chosen scores and the weighted roll of V.
// Scores are compared after rounding to T, the precision the library ranks in.
template <class T>
std::vector<double> intra_attention(std::span<const T> q, std::span<const T> k, std::span<const T> v, std::size_t n,
                                    std::size_t d, std::size_t k_delay, std::size_t period) {
    const auto c = correlation(q, k, n, d);
    std::vector<std::size_t> chosen;
    const std::size_t limit = std::min(period, d);
    for (std::size_t m = 0; m < k_delay; ++m) {
        std::size_t best = 0;
        for (std::size_t tau = 1; tau < limit; ++tau) {
            if (std::find(chosen.begin(), chosen.end(), tau) != chosen.end()) continue;
            if (best == 0 || T(c[tau]) > T(c[best])) best = tau;
        }
        chosen.push_back(best);
    }
    double mx = -1e300;
    for (auto t : chosen) mx = std::max(mx, c[t]);
    std::vector<double> w;
    double z = 0;
    for (auto t : chosen) z += w.emplace_back(std::exp(c[t] - mx));
    std::vector<double> out(n * d, 0.0);
    for (std::size_t m = 0; m < k_delay; ++m)
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t t = 0; t < d; ++t) out[r * d + t] += w[m] / z * double(v[r * d + (t + chosen[m]) % d]);
    return out;
}

}  // namespace rff::oracle
