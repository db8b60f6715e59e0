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

#ifndef PROGEN_DATA_TOKENIZER_HPP_
#define PROGEN_DATA_TOKENIZER_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace progen::data {

// Lowercases, splits on whitespace, and emits each of . , : ; as its own token.
std::vector<std::string> tokenize(std::string_view text);

// Space-joined tokens.
std::string join_tokens(std::span<const std::string> tokens);

}  // namespace progen::data

#endif  // PROGEN_DATA_TOKENIZER_HPP_
