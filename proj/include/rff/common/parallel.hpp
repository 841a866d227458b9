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

namespace rff {

/// Upper bound on worker threads used by kernels. Initialized from RFF_THREADS
/// (default 1). Results never depend on this value: every output element is
/// reduced by exactly one worker in a fixed order.
std::size_t max_threads();
void set_max_threads(std::size_t n);

/// Runs fn(lo, hi) over disjoint contiguous chunks of [0, n).
void parallel_for(std::size_t n, std::size_t min_chunk,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace rff
