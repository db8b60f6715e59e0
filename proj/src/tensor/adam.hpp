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

#ifndef PROGEN_TENSOR_ADAM_HPP_
#define PROGEN_TENSOR_ADAM_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tensor/parameter_store.hpp"

namespace progen {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Learning rate per parameter group; every group in the store needs one.
  std::map<std::string, double> group_lr = {{kVisualGroup, 5e-5}, {kOtherGroup, 1e-4}};
};

class AdamState {
 public:
  explicit AdamState(AdamOptions options = {}) : options_(std::move(options)) {}

  const AdamOptions& options() const { return options_; }
  std::uint64_t step() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

  // Bias-corrected Adam update of every parameter, then zeroes the grads.
  // Throws ContractError if a parameter holds no gradient.
  void update(ParameterStore& params);

 private:
  AdamOptions options_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

inline void adam_step(ParameterStore& params, AdamState& state) { state.update(params); }

}  // namespace progen

#endif  // PROGEN_TENSOR_ADAM_HPP_
