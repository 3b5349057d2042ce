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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "layerpca/edit.hpp"

namespace layerpca {

inline constexpr std::pair<double, double> kDefaultSigmaRange{-2.0, 2.0};

// A named, persisted control. `sigma_default` is the slider's resting value.
struct EditEntry {
  std::string name;
  Eigen::Index component = 0;
  LayerRange layers;
  LatentSpace space = LatentSpace::style;
  double sigma_default = 0.0;
  std::pair<double, double> sigma_range = kDefaultSigmaRange;

  EditSpec to_spec() const { return {name, component, layers, space, sigma_default}; }
  friend bool operator==(const EditEntry&, const EditEntry&) = default;
};

// On disk:
//   {"model": id, "basis": path, "edits": [{"name", "component", "layer_start",
//    "layer_end" | "all", "space", "sigma_default", "sigma_range": [lo, hi]}]}
// `basis` resolves relative to the edit-set file.
struct EditSet {
  std::string model;
  std::string basis;
  std::vector<EditEntry> edits;

  friend bool operator==(const EditSet&, const EditSet&) = default;
};

// Optional cross-checks applied on load.
struct EditSetContext {
  std::optional<Eigen::Index> latent_dim;   // must match the referenced basis
  std::optional<std::size_t> layer_count;   // bounds layer_end
  bool require_basis = false;               // fail if the basis file is absent
};

nlohmann::json edit_set_to_json(const EditSet& set);
// Strict: unknown keys, missing keys, wrong types and inverted ranges raise
// SchemaError carrying a JSON pointer.
EditSet edit_set_from_json(const nlohmann::json& doc, std::optional<std::size_t> layer_count = {});

void save_edit_set(const EditSet& set, const std::filesystem::path& path);
EditSet load_edit_set(const std::filesystem::path& path, const EditSetContext& ctx = {});

// Session edit deltas: {"name"?, "component", "layer_start", "layer_end" | "all",
// "space", "sigma"}.
nlohmann::json edit_spec_to_json(const EditSpec& spec);
EditSpec edit_spec_from_json(const nlohmann::json& doc, const std::string& pointer = "");

}  // namespace layerpca
