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

#include "tensor/parameter_store.hpp"

#include <algorithm>

#include "util/error.hpp"

namespace progen {

Tensor ParameterStore::add(const std::string& name, Tensor init, const std::string& group) {
  if (!init.defined()) throw ContractError("parameter '" + name + "' is undefined");
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  init.set_requires_grad(true);
  index_.emplace(name, entries_.size());
  entries_.push_back({name, group, init});
  return init;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return entries_[it->second].tensor;
}

std::size_t ParameterStore::total_values() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

std::vector<std::string> ParameterStore::names_in_group(const std::string& group) const {
  std::vector<std::string> names;
  for (const auto& e : entries_)
    if (e.group == group) names.push_back(e.name);
  return names;
}

void ParameterStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

std::vector<std::vector<double>> ParameterStore::snapshot() const {
  std::vector<std::vector<double>> values;
  values.reserve(entries_.size());
  for (const auto& e : entries_) values.emplace_back(e.tensor.data().begin(), e.tensor.data().end());
  return values;
}

void ParameterStore::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != entries_.size()) throw ContractError("snapshot does not match parameter count");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto dst = entries_[i].tensor.mutable_data();
    if (values[i].size() != dst.size()) {
      throw ContractError("snapshot size mismatch for '" + entries_[i].name + "'");
    }
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace progen
