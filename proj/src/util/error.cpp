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

#include "util/error.hpp"

namespace progen {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kContract: return "contract error";
    case ErrorKind::kIndex: return "index error";
    case ErrorKind::kNumeric: return "numeric failure";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kData: return "data error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kCorruption: return "corruption error";
    case ErrorKind::kUnsupportedVersion: return "unsupported version";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

}  // namespace progen
