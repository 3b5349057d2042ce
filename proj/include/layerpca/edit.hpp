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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "layerpca/direction.hpp"
#include "layerpca/pca.hpp"

namespace layerpca {

// style: per-layer w_i of a style-modulated generator.
// skip:  latent z plus per-layer skip-z_i.
enum class LatentSpace { style, skip };

std::string_view to_string(LatentSpace s) noexcept;
LatentSpace latent_space_from_string(std::string_view s);

// One image's latent inputs. `base` is w (style) or z (skip); `per_layer[i]`
// feeds layer i. Treated as an immutable value: every edit returns a copy.
struct LayeredLatentState {
  LatentSpace space = LatentSpace::style;
  Eigen::VectorXd base;
  std::vector<Eigen::VectorXd> per_layer;

  static LayeredLatentState fresh(LatentSpace space, const Eigen::VectorXd& base,
                                  std::size_t layer_count);

  std::size_t layer_count() const noexcept { return per_layer.size(); }
  Eigen::Index dim() const noexcept { return base.size(); }

  friend bool operator==(const LayeredLatentState& a, const LayeredLatentState& b);
};

// Inclusive layer range [start, end], or every layer plus the base latent.
struct LayerRange {
  bool all = true;
  std::size_t start = 0;
  std::size_t end = 0;

  static LayerRange every() noexcept { return {}; }
  static LayerRange span(std::size_t start, std::size_t end) noexcept {
    return {false, start, end};
  }
  friend bool operator==(const LayerRange&, const LayerRange&) = default;
};

// E(v_k, start-end) with a magnitude in standard deviations.
struct EditSpec {
  std::string name;
  Eigen::Index component = 0;
  LayerRange layers;
  LatentSpace space = LatentSpace::style;
  double sigma = 0.0;

  friend bool operator==(const EditSpec&, const EditSpec&) = default;
};

// Raw offset for `sigma` standard deviations along component k:
// sigma * sqrt(lambda_k) * v_k for a PCA basis, sigma * u_k for regressed
// directions.
Eigen::VectorXd component_offset(const PrincipalBasis& b, Eigen::Index k, double sigma);
Eigen::VectorXd component_offset(const PrincipalDirections& d, Eigen::Index k, double sigma);

// w' = w + V x (or z' = z + U x) on the base and every layer. `x` is in raw
// coordinate units.
LayeredLatentState apply_edit_global(const LayeredLatentState& state, const PrincipalBasis& b,
                                     const Eigen::Ref<const Eigen::VectorXd>& x);
LayeredLatentState apply_edit_global(const LayeredLatentState& state,
                                     const PrincipalDirections& d,
                                     const Eigen::Ref<const Eigen::VectorXd>& x);

// Adds the component offset to per_layer[start..end] only; an ALL range is a
// global edit.
LayeredLatentState apply_edit_layerwise(const LayeredLatentState& state, const EditSpec& spec,
                                        const PrincipalBasis& b,
                                        std::optional<double> sigma_override = std::nullopt);
LayeredLatentState apply_edit_layerwise(const LayeredLatentState& state, const EditSpec& spec,
                                        const PrincipalDirections& d,
                                        std::optional<double> sigma_override = std::nullopt);

// Adds an arbitrary offset over `range`. Shared by the edit entry points.
LayeredLatentState apply_offset(const LayeredLatentState& state,
                                const Eigen::Ref<const Eigen::VectorXd>& offset,
                                const LayerRange& range);

// Interpolation to the mean: v -> mu + psi (v - mu) for every vector.
LayeredLatentState truncate(const LayeredLatentState& state, double psi,
                            const Eigen::Ref<const Eigen::VectorXd>& mean);

// Copies donor's per-layer inputs in [start, end]; recipient keeps its base.
LayeredLatentState style_mix(const LayeredLatentState& recipient,
                             const LayeredLatentState& donor, std::size_t start,
                             std::size_t end);

// Keeps the anchor's coordinates on `fixed` and redraws the rest from
// N(0, lambda_k), then reconstructs through the full basis.
Eigen::VectorXd randomize_subset(const PrincipalBasis& b,
                                 const Eigen::Ref<const Eigen::VectorXd>& anchor,
                                 const std::vector<Eigen::Index>& fixed, std::uint64_t seed);

}  // namespace layerpca
