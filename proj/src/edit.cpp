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

#include "layerpca/edit.hpp"

#include <algorithm>
#include <cmath>

#include "layerpca/errors.hpp"
#include "layerpca/rng.hpp"

namespace layerpca {

namespace {

constexpr std::uint32_t kRandomizeStream = 0x52534255u;  // "RSBU"

void check_layers(const LayeredLatentState& s, const LayerRange& r) {
  if (r.all) return;
  if (r.start > r.end) {
    throw RangeError("layer range " + std::to_string(r.start) + "-" + std::to_string(r.end) +
                     " is empty");
  }
  if (r.end >= s.layer_count()) {
    throw RangeError("layer " + std::to_string(r.end) + " out of bounds for " +
                     std::to_string(s.layer_count()) + " layers");
  }
}

void check_component(Eigen::Index k, Eigen::Index count) {
  if (k < 0 || k >= count) {
    throw RangeError("component " + std::to_string(k) + " out of range [0, " +
                     std::to_string(count) + ")");
  }
}

template <class Directions>
LayeredLatentState layerwise(const LayeredLatentState& state, const EditSpec& spec,
                             const Directions& d, std::optional<double> sigma_override) {
  if (spec.space != state.space) {
    throw DimensionError("edit '" + spec.name + "' targets " + std::string(to_string(spec.space)) +
                         " space, state is " + std::string(to_string(state.space)));
  }
  const double sigma = sigma_override.value_or(spec.sigma);
  if (!std::isfinite(sigma)) throw RangeError("edit magnitude must be finite");
  check_layers(state, spec.layers);
  return apply_offset(state, component_offset(d, spec.component, sigma), spec.layers);
}

}  // namespace

std::string_view to_string(LatentSpace s) noexcept {
  return s == LatentSpace::style ? "style" : "skip";
}

LatentSpace latent_space_from_string(std::string_view s) {
  if (s == "style") return LatentSpace::style;
  if (s == "skip") return LatentSpace::skip;
  throw RangeError("unknown latent space '" + std::string(s) + "'");
}

LayeredLatentState LayeredLatentState::fresh(LatentSpace space, const Eigen::VectorXd& base,
                                             std::size_t layer_count) {
  LayeredLatentState s;
  s.space = space;
  s.base = base;
  s.per_layer.assign(layer_count, base);
  return s;
}

bool operator==(const LayeredLatentState& a, const LayeredLatentState& b) {
  if (a.space != b.space || a.base.size() != b.base.size() ||
      a.per_layer.size() != b.per_layer.size()) {
    return false;
  }
  if (a.base != b.base) return false;
  for (std::size_t i = 0; i < a.per_layer.size(); ++i) {
    if (a.per_layer[i].size() != b.per_layer[i].size() || a.per_layer[i] != b.per_layer[i]) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd component_offset(const PrincipalBasis& b, Eigen::Index k, double sigma) {
  check_component(k, b.components());
  return (sigma * std::sqrt(b.variances[k])) * b.basis.col(k);
}

Eigen::VectorXd component_offset(const PrincipalDirections& d, Eigen::Index k, double sigma) {
  check_component(k, d.components());
  return sigma * d.directions.col(k);
}

LayeredLatentState apply_offset(const LayeredLatentState& state,
                                const Eigen::Ref<const Eigen::VectorXd>& offset,
                                const LayerRange& range) {
  if (offset.size() != state.dim()) {
    throw DimensionError("edit offset dim " + std::to_string(offset.size()) +
                         " != state dim " + std::to_string(state.dim()));
  }
  check_layers(state, range);
  LayeredLatentState out = state;
  if (range.all) {
    out.base += offset;
    for (auto& v : out.per_layer) v += offset;
  } else {
    for (std::size_t i = range.start; i <= range.end; ++i) out.per_layer[i] += offset;
  }
  return out;
}

LayeredLatentState apply_edit_global(const LayeredLatentState& state, const PrincipalBasis& b,
                                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != b.components()) throw DimensionError("coordinate length != K");
  if (b.dim() != state.dim()) throw DimensionError("basis dim != state dim");
  return apply_offset(state, b.basis * x, LayerRange::every());
}

LayeredLatentState apply_edit_global(const LayeredLatentState& state,
                                     const PrincipalDirections& d,
                                     const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != d.components()) throw DimensionError("coordinate length != K");
  if (d.dim() != state.dim()) throw DimensionError("direction dim != state dim");
  return apply_offset(state, d.directions * x, LayerRange::every());
}

LayeredLatentState apply_edit_layerwise(const LayeredLatentState& state, const EditSpec& spec,
                                        const PrincipalBasis& b,
                                        std::optional<double> sigma_override) {
  return layerwise(state, spec, b, sigma_override);
}

LayeredLatentState apply_edit_layerwise(const LayeredLatentState& state, const EditSpec& spec,
                                        const PrincipalDirections& d,
                                        std::optional<double> sigma_override) {
  return layerwise(state, spec, d, sigma_override);
}

LayeredLatentState truncate(const LayeredLatentState& state, double psi,
                            const Eigen::Ref<const Eigen::VectorXd>& mean) {
  if (!(psi >= 0.0 && psi <= 1.0)) {
    throw RangeError("truncation psi " + std::to_string(psi) + " outside [0, 1]");
  }
  if (mean.size() != state.dim()) throw DimensionError("truncation mean dim mismatch");
  LayeredLatentState out = state;
  // Weighted form so psi = 1 and psi = 0 reproduce v and mu exactly.
  auto pull = [&](Eigen::VectorXd& v) { v = psi * v + (1.0 - psi) * mean; };
  pull(out.base);
  for (auto& v : out.per_layer) pull(v);
  return out;
}

LayeredLatentState style_mix(const LayeredLatentState& recipient,
                             const LayeredLatentState& donor, std::size_t start,
                             std::size_t end) {
  if (recipient.space != donor.space || recipient.dim() != donor.dim() ||
      recipient.layer_count() != donor.layer_count()) {
    throw DimensionError("style mix: recipient and donor shapes differ");
  }
  check_layers(recipient, LayerRange::span(start, end));
  LayeredLatentState out = recipient;
  for (std::size_t i = start; i <= end; ++i) out.per_layer[i] = donor.per_layer[i];
  return out;
}

Eigen::VectorXd randomize_subset(const PrincipalBasis& b,
                                 const Eigen::Ref<const Eigen::VectorXd>& anchor,
                                 const std::vector<Eigen::Index>& fixed, std::uint64_t seed) {
  const Eigen::Index k = b.components();
  std::vector<bool> keep(static_cast<std::size_t>(k), false);
  for (auto i : fixed) {
    check_component(i, k);
    keep[static_cast<std::size_t>(i)] = true;
  }
  Eigen::VectorXd x = project(b, anchor);
  const CounterRng rng(seed, kRandomizeStream);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!keep[static_cast<std::size_t>(i)]) {
      x[i] = rng.normal(static_cast<std::uint64_t>(i)) * std::sqrt(b.variances[i]);
    }
  }
  return reconstruct(b, x);
}

}  // namespace layerpca
