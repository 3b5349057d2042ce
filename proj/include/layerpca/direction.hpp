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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace layerpca {

// Latent-space directions u_k regressed from feature-space PCA coordinates.
// Columns keep the order of the source basis and are not normalized: u_k is
// the latent offset per raw unit of coordinate k.
struct PrincipalDirections {
  Eigen::MatrixXd directions;  // d_z x K
  std::string source_layer;
  std::uint64_t fitted_from = 0;
  std::optional<std::uint64_t> seed;
  std::string bridge_descriptor_hash;

  Eigen::Index dim() const noexcept { return directions.rows(); }
  Eigen::Index components() const noexcept { return directions.cols(); }
};

// Streaming accumulator for U = argmin sum_j ||U x_j - z_j||^2 via the
// batched normal equations (sum x x^T) U^T = sum x z^T. Partial sums are
// kept per fixed-size chunk and reduced in index order so the result does
// not depend on how samples are fed.
class DirectionRegressor {
 public:
  DirectionRegressor(Eigen::Index latent_dim, Eigen::Index components);

  // Rows of `latents` (N x d_z) pair with rows of `coords` (N x K).
  void add(const Eigen::Ref<const Eigen::MatrixXd>& latents,
           const Eigen::Ref<const Eigen::MatrixXd>& coords);

  std::uint64_t count() const noexcept { return count_; }
  PrincipalDirections solve(std::string source_layer) const;

 private:
  static constexpr std::uint64_t kChunk = 4096;
  void close_chunk();

  Eigen::Index latent_dim_;
  Eigen::Index k_;
  Eigen::MatrixXd gram_;        // K x K
  Eigen::MatrixXd cross_;       // K x d_z
  Eigen::MatrixXd chunk_gram_;
  Eigen::MatrixXd chunk_cross_;
  std::uint64_t chunk_fill_ = 0;
  std::uint64_t count_ = 0;
};

PrincipalDirections regress_directions(const Eigen::Ref<const Eigen::MatrixXd>& latents,
                                       const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                       std::string source_layer = {});

// K orthonormal columns from seeded standard-normal draws (QR with a
// positive-diagonal R, so the result is unique per seed).
PrincipalDirections random_basis(Eigen::Index dim, Eigen::Index components,
                                 std::uint64_t seed);

void save_directions(const PrincipalDirections& d, const std::filesystem::path& gspc_path);
PrincipalDirections load_directions(const std::filesystem::path& gspc_path);

}  // namespace layerpca
