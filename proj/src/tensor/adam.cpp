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

#include "tensor/adam.hpp"

#include <algorithm>
#include <cmath>

#include "util/error.hpp"

namespace progen {

void AdamState::update(ParameterStore& params) {
  const auto& entries = params.entries();
  if (m_.empty()) {
    for (const auto& e : entries) {
      m_.emplace_back(e.tensor.numel(), 0.0);
      v_.emplace_back(e.tensor.numel(), 0.0);
    }
  }
  if (m_.size() != entries.size()) throw ContractError("optimizer state does not match parameter store");
  std::vector<double> lrs;
  for (const auto& e : entries) {
    if (!e.tensor.has_grad()) throw ContractError("parameter '" + e.name + "' has no gradient");
    if (m_[lrs.size()].size() != e.tensor.numel()) {
      throw ContractError("optimizer moment shape mismatch for '" + e.name + "'");
    }
    auto lr = options_.group_lr.find(e.group);
    if (lr == options_.group_lr.end()) {
      throw ContractError("no learning rate for parameter group '" + e.group + "'");
    }
    lrs.push_back(lr->second);
  }
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor t = entries[p].tensor;
    auto data = t.mutable_data();
    auto grad = t.mutable_grad();
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      data[i] -= lrs[p] * mhat / (std::sqrt(vhat) + options_.eps);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
  }
}

}  // namespace progen
