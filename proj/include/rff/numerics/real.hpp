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

// The tensor engine and model are compiled twice: once in 32-bit (the normal
// build) and once in 64-bit for gradient verification. Each variant lives in
// its own inline namespace so both can be linked into one executable.
#if defined(RFF_REAL_DOUBLE)
#define RFF_NN_ABI f64
#else
#define RFF_NN_ABI f32
#endif

namespace rff::nn {
inline namespace RFF_NN_ABI {
#if defined(RFF_REAL_DOUBLE)
using Real = double;
#else
using Real = float;
#endif
}  // namespace RFF_NN_ABI
}  // namespace rff::nn
