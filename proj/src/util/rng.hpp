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

#ifndef PROGEN_UTIL_RNG_HPP_
#define PROGEN_UTIL_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace progen {

// Seeded generator whose derived draws are identical on every platform.
// std::mt19937_64 is fully specified by the standard, but the standard
// distributions are not, so uniform/normal are derived from raw words here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one draw per call).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  // Independent child stream, e.g. one per model or per epoch.
  Rng fork() { return Rng(next() ^ 0x9e3779b97f4a7c15ULL); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace progen

#endif  // PROGEN_UTIL_RNG_HPP_
