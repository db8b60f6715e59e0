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

#ifndef PROGEN_TENSOR_PARAMETER_STORE_HPP_
#define PROGEN_TENSOR_PARAMETER_STORE_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include "tensor/tensor.hpp"

namespace progen {

inline constexpr const char* kVisualGroup = "visual";
inline constexpr const char* kOtherGroup = "other";

// Named trainable arrays in registration order, each tagged with an
// optimizer group.
class ParameterStore {
 public:
  struct Entry {
    std::string name;
    std::string group;
    Tensor tensor;
  };

  // Registers `init` as a trainable parameter and returns a handle sharing
  // its storage. Names are unique.
  Tensor add(const std::string& name, Tensor init, const std::string& group = kOtherGroup);

  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  const Tensor& get(const std::string& name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t total_values() const;

  std::vector<std::string> names_in_group(const std::string& group) const;

  void zero_grad();

  // Copies every value array, in registration order.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace progen

#endif  // PROGEN_TENSOR_PARAMETER_STORE_HPP_
