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

#include "rff/numerics/kernels.hpp"

#include <vector>

#include "rff/common/parallel.hpp"

namespace rff::nn::kernels {
inline namespace RFF_NN_ABI {

void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n) {
    parallel_for(m, 16, [=](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            Real* __restrict crow = c + i * n;
            const Real* arow = a + i * k;
            for (std::size_t p = 0; p < k; ++p) {
                const Real av = arow[p];
                if (av == Real{0}) {
                    continue;
                }
                const Real* __restrict brow = b + p * n;
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += av * brow[j];
                }
            }
        }
    });
}

void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n) {
    // Transposing B turns the dot-product form into the vectorizable axpy form.
    std::vector<Real> bt(k * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t p = 0; p < k; ++p) {
            bt[p * n + j] = b[j * k + p];
        }
    }
    gemm_nn(a, bt.data(), c, m, k, n);
}

void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n) {
    parallel_for(k, 16, [=](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p) {
            Real* __restrict crow = c + p * n;
            for (std::size_t i = 0; i < m; ++i) {
                const Real av = a[i * k + p];
                if (av == Real{0}) {
                    continue;
                }
                const Real* __restrict brow = b + i * n;
                for (std::size_t j = 0; j < n; ++j) {
                    crow[j] += av * brow[j];
                }
            }
        }
    });
}

}  // namespace RFF_NN_ABI
}  // namespace rff::nn::kernels
