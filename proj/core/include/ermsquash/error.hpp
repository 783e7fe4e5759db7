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

#ifndef ERMSQUASH_ERROR_HPP_
#define ERMSQUASH_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace ermsquash {

// Error categories double as the machine-readable prefix printed by the CLI
// (`error:<category>:`).
enum class ErrorKind {
  kDimension,
  kEmpty,
  kParse,
  kParameter,
  kStructure,
  kInvariant,
  kInput,
  kSchema,
  kEvaluation,
  kLimit,
  kIo,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace ermsquash

#endif  // ERMSQUASH_ERROR_HPP_
