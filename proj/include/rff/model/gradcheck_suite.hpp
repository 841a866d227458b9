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
#include <string>
#include <vector>

// Finite-difference checks over every differentiable op and a tiny end-to-end
// model. Both precisions are linked into the same binary; the 64-bit run uses
// the tighter tolerance.

namespace rff::model {

struct GradSuiteEntry {
    std::string name;
    double relative_error = 0;
    double tolerance = 0;
    std::size_t probed = 0;
    bool passed = false;
};

std::vector<GradSuiteEntry> run_gradcheck32(std::uint64_t seed);
std::vector<GradSuiteEntry> run_gradcheck64(std::uint64_t seed);

}  // namespace rff::model
