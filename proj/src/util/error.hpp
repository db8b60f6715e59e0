// Copyright 2026 The Progen Authors. All Rights Reserved.
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
// =============================================================================

#ifndef PROGEN_UTIL_ERROR_HPP_
#define PROGEN_UTIL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace progen {

enum class ErrorKind {
  kDimension,
  kContract,
  kIndex,
  kNumeric,
  kConfig,
  kData,
  kParse,
  kCorruption,
  kUnsupportedVersion,
  kIo,
};

const char* error_kind_name(ErrorKind kind);

// Base of every exception thrown by the library. The kind drives the exit
// code and C status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define PROGEN_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  };

PROGEN_DEFINE_ERROR(DimensionError, ErrorKind::kDimension)
PROGEN_DEFINE_ERROR(ContractError, ErrorKind::kContract)
PROGEN_DEFINE_ERROR(IndexError, ErrorKind::kIndex)
PROGEN_DEFINE_ERROR(NumericError, ErrorKind::kNumeric)
PROGEN_DEFINE_ERROR(ConfigError, ErrorKind::kConfig)
PROGEN_DEFINE_ERROR(DataError, ErrorKind::kData)
PROGEN_DEFINE_ERROR(ParseError, ErrorKind::kParse)
PROGEN_DEFINE_ERROR(CorruptionError, ErrorKind::kCorruption)
PROGEN_DEFINE_ERROR(UnsupportedVersionError, ErrorKind::kUnsupportedVersion)
PROGEN_DEFINE_ERROR(IoError, ErrorKind::kIo)

#undef PROGEN_DEFINE_ERROR

}  // namespace progen

#endif  // PROGEN_UTIL_ERROR_HPP_
