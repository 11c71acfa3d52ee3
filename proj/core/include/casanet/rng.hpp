// Copyright 2026 The CasaNet Authors
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

#pragma once

#include <cstdint>
#include <vector>

namespace casanet {

// Deterministic splitmix64 generator. Every stochastic choice in the
// project goes through this class so that a run is a pure function of
// its seed. The integer and uniform streams are platform-exact;
// gaussian/gamma/beta draws use libm and are identical for a given
// libm build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; one spare value is cached.
  double gaussian();

  // Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);

  // Beta(a, b) as a ratio of two gamma draws.
  double beta(double a, double b);

  // Unbiased integer in [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);

  // Independent substream derived from the base seed, so the result
  // does not depend on how many draws were made from this generator.
  Rng child(std::uint64_t stream) const;

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace casanet
