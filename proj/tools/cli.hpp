// Copyright 2026 The ermsquash Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ERMSQUASH_TOOLS_CLI_HPP_
#define ERMSQUASH_TOOLS_CLI_HPP_

#include <ostream>

#include "ermsquash/error.hpp"

namespace ermsquash::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;      // unreadable or malformed input
inline constexpr int kExitFlags = 2;      // invalid flags or parameters
inline constexpr int kExitInvariant = 3;  // internal invariant violation
inline constexpr int kExitThreshold = 4;  // verify deltas above thresholds

int exit_code_for(ErrorKind kind);

// Runs `ermsquash <subcommand> ...`. Errors are written to `err` as one line
// starting with `error:<category>:`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ermsquash::cli

#endif  // ERMSQUASH_TOOLS_CLI_HPP_
