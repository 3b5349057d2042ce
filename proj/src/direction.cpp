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

#include "layerpca/direction.hpp"

#include <fstream>

#include "json.hpp"

#include "layerpca/errors.hpp"
#include "layerpca/linalg.hpp"
#include "layerpca/rng.hpp"
#include "layerpca/tensor.hpp"

namespace layerpca {

namespace {
constexpr std::uint32_t kRandomBasisStream = 0x52424153u;  // "RBAS"
}

DirectionRegressor::DirectionRegressor(Eigen::Index latent_dim, Eigen::Index components)
    : latent_dim_(latent_dim),
      k_(components),
      gram_(Eigen::MatrixXd::Zero(components, components)),
      cross_(Eigen::MatrixXd::Zero(components, latent_dim)),
      chunk_gram_(Eigen::MatrixXd::Zero(components, components)),
      chunk_cross_(Eigen::MatrixXd::Zero(components, latent_dim)) {
  if (latent_dim <= 0 || components <= 0) {
    throw DimensionError("regression dimensions must be positive");
  }
}

void DirectionRegressor::add(const Eigen::Ref<const Eigen::MatrixXd>& latents,
                             const Eigen::Ref<const Eigen::MatrixXd>& coords) {
  if (latents.rows() != coords.rows()) {
    throw DimensionError("regression: " + std::to_string(latents.rows()) + " latents vs " +
                         std::to_string(coords.rows()) + " coordinate rows");
  }
  if (latents.cols() != latent_dim_ || coords.cols() != k_) {
    throw DimensionError("regression: latent or coordinate width mismatch");
  }
  Eigen::Index r = 0;
  while (r < latents.rows()) {
    const Eigen::Index take = std::min<Eigen::Index>(
        latents.rows() - r, static_cast<Eigen::Index>(kChunk - chunk_fill_));
    const auto x = coords.middleRows(r, take);
    chunk_gram_.noalias() += x.transpose() * x;
    chunk_cross_.noalias() += x.transpose() * latents.middleRows(r, take);
    chunk_fill_ += static_cast<std::uint64_t>(take);
    count_ += static_cast<std::uint64_t>(take);
    r += take;
    if (chunk_fill_ == kChunk) close_chunk();
  }
}

void DirectionRegressor::close_chunk() {
  gram_ += chunk_gram_;
  cross_ += chunk_cross_;
  chunk_gram_.setZero();
  chunk_cross_.setZero();
  chunk_fill_ = 0;
}

PrincipalDirections DirectionRegressor::solve(std::string source_layer) const {
  if (count_ <= static_cast<std::uint64_t>(k_)) {
    throw InsufficientDataError("regression needs more than " + std::to_string(k_) +
                                " samples, got " + std::to_string(count_));
  }
  const Eigen::MatrixXd gram = gram_ + chunk_gram_;
  const Eigen::MatrixXd cross = cross_ + chunk_cross_;

  const double scale = gram.diagonal().maxCoeff();
  for (Eigen::Index k = 0; k < k_; ++k) {
    if (!(gram(k, k) > kRankTolerance * scale)) {
      throw RankError("regression: coordinate " + std::to_string(k) + " has no variance", k);
    }
  }
  PrincipalDirections out;
  try {
    out.directions = solve_least_squares(gram, cross).transpose();
  } catch (const RankError& e) {
    throw RankError(std::string("regression: coordinate covariance is rank deficient; "
                                "dead component ") +
                        std::to_string(e.index()),
                    e.index());
  }
  out.source_layer = std::move(source_layer);
  out.fitted_from = count_;
  return out;
}

PrincipalDirections regress_directions(const Eigen::Ref<const Eigen::MatrixXd>& latents,
                                       const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                       std::string source_layer) {
  DirectionRegressor reg(latents.cols(), coords.cols());
  reg.add(latents, coords);
  return reg.solve(std::move(source_layer));
}

PrincipalDirections random_basis(Eigen::Index dim, Eigen::Index components,
                                 std::uint64_t seed) {
  if (components > dim) {
    throw RangeError("random basis: K = " + std::to_string(components) + " exceeds d = " +
                     std::to_string(dim));
  }
  if (components <= 0) throw RangeError("random basis: K must be positive");
  const CounterRng rng(seed, kRandomBasisStream);
  Eigen::MatrixXd g(dim, components);
  for (Eigen::Index c = 0; c < components; ++c) {
    rng.fill_normal(static_cast<std::uint64_t>(c * dim), g.col(c));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, components);
  const auto& r = qr.matrixQR();
  for (Eigen::Index c = 0; c < components; ++c) {
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  }
  PrincipalDirections out;
  out.directions = std::move(q);
  out.source_layer = "random";
  out.seed = seed;
  return out;
}

void save_directions(const PrincipalDirections& d, const std::filesystem::path& gspc_path) {
  save_tensor(to_tensor(d.directions), gspc_path);
  nlohmann::json meta = {{"kind", "directions"},
                         {"dim", d.dim()},
                         {"K", d.components()},
                         {"source_layer", d.source_layer},
                         {"fitted_from", d.fitted_from}};
  if (d.seed) meta["seed"] = *d.seed;
  if (!d.bridge_descriptor_hash.empty()) meta["bridge_descriptor_hash"] = d.bridge_descriptor_hash;
  auto side = gspc_path;
  side.replace_extension(".json");
  std::ofstream out(side);
  if (!out) throw IoError("cannot write directions sidecar " + side.string());
  out << meta.dump(2) << '\n';
}

PrincipalDirections load_directions(const std::filesystem::path& gspc_path) {
  PrincipalDirections d;
  d.directions = to_matrix(load_tensor(gspc_path));
  auto side = gspc_path;
  side.replace_extension(".json");
  std::ifstream in(side);
  if (in) {
    const auto meta = nlohmann::json::parse(in);
    d.source_layer = meta.value("source_layer", std::string{});
    d.fitted_from = meta.value("fitted_from", std::uint64_t{0});
    if (meta.contains("seed")) d.seed = meta["seed"].get<std::uint64_t>();
    d.bridge_descriptor_hash = meta.value("bridge_descriptor_hash", std::string{});
    if (meta.value("dim", d.dim()) != d.dim() || meta.value("K", d.components()) != d.components()) {
      throw DimensionError("directions sidecar disagrees with tensor shape");
    }
  }
  return d;
}

}  // namespace layerpca
