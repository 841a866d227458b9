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

#include <iosfwd>

namespace rff::cli {

/// Exit codes of the rff tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,      // bad flags, unknown config keys, invalid values
    kExitData = 2,       // unreadable or malformed files, shape mismatches
    kExitNumerical = 3,  // non-finite loss, failed gradient check
};

/// Entry point of the rff tool. Output goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rff::cli
