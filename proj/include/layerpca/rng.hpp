/*
 * Copyright 2026 The layerpca Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace layerpca {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// Stateless random streams keyed by (seed, stream). Draw i of a stream
// depends only on (seed, stream, i), so any partition of the index range
// reproduces the same values.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream) noexcept;

  // Uniform in the open interval (0, 1), 53-bit resolution.
  double uniform(std::uint64_t index) const noexcept;
  double normal(std::uint64_t index) const noexcept;

  // Fills `out` with normal draws index0, index0+1, ...
  void fill_normal(std::uint64_t index0, Eigen::Ref<Eigen::VectorXd> out) const;

 private:
  PhiloxCounter block(std::uint64_t block_index) const noexcept;

  PhiloxKey key_;
  std::uint32_t stream_;
};

}  // namespace layerpca
