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

#include "rff/numerics/real.hpp"

// Dense row-major GEMM kernels. All accumulate into C. Every output element is
// reduced sequentially over the inner index, so results do not depend on the
// thread count.
namespace rff::nn::kernels {
inline namespace RFF_NN_ABI {

/// C[m,n] += A[m,k] * B[k,n]
void gemm_nn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n);
/// C[m,n] += A[m,k] * B[n,k]^T
void gemm_nt(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n);
/// C[k,n] += A[m,k]^T * B[m,n]
void gemm_tn(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n);

}  // namespace RFF_NN_ABI
}  // namespace rff::nn::kernels
