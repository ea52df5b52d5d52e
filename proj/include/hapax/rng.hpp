// Copyright 2026 The hapax-mcmc Authors.
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

#ifndef HAPAX_RNG_HPP_
#define HAPAX_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>

namespace hapax {

// Seedable 64-bit generator (std::mt19937_64) with explicit, portable
// derivations of uniform variates. Independent substreams are obtained by
// hashing (master seed, stream tag, index) through SplitMix64, so replicate k
// of a study always sees the same numbers regardless of scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t master, std::uint64_t stream,
                       std::uint64_t index);

  std::uint64_t next() { return engine_(); }

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform_open01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform on {0, ..., n-1}; unbiased (rejection on the top range).
  std::size_t uniform_index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer; also used to derive substream seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace hapax

#endif  // HAPAX_RNG_HPP_
