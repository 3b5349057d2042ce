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
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "layerpca/bridge.hpp"
#include "layerpca/edit.hpp"
#include "layerpca/errors.hpp"

namespace layerpca {

// Directions that EditSpecs index into: a style-space PCA basis or
// regressed latent directions.
using EditSource = std::variant<PrincipalBasis, PrincipalDirections>;

Eigen::Index source_components(const EditSource& s);
Eigen::Index source_dim(const EditSource& s);
LayeredLatentState apply_spec(const LayeredLatentState& state, const EditSpec& spec,
                              const EditSource& source);
LayeredLatentState replay(const LayeredLatentState& anchor, const std::vector<EditSpec>& edits,
                          const EditSource& source);

// One exploration. `current` is always replay(anchor, edits).
struct Session {
  std::string id;
  GeneratorDescriptor descriptor;
  std::string basis_ref;
  std::uint64_t anchor_seed = 0;
  LayeredLatentState anchor;
  std::vector<EditSpec> edits;
  LayeredLatentState current;
};

nlohmann::json session_to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);

struct RenderRequest {
  std::vector<EditSpec> overrides;
  bool commit = false;
  // Return the feature tensor at this layer instead of the image.
  std::optional<std::size_t> capture_layer;
  Tap tap = Tap::post;
};

// In-memory session store. Mutations of one session are serialized;
// renders only take a shared lock and may run in parallel.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<GeneratorBridge> bridge, std::shared_ptr<const EditSource> source,
                 std::string basis_ref = {});

  std::string create(std::uint64_t anchor_seed);
  // Restores an exported snapshot, replaying its edit stack.
  std::string restore(const nlohmann::json& snapshot);
  bool remove(const std::string& id);
  std::vector<std::string> ids() const;

  Session snapshot(const std::string& id) const;
  std::vector<EditSpec> push_edit(const std::string& id, const EditSpec& spec);
  std::vector<EditSpec> pop_edit(const std::string& id);
  std::vector<EditSpec> edits(const std::string& id) const;

  TensorBlock render(const std::string& id, const RenderRequest& request);

  const GeneratorDescriptor& descriptor() const noexcept { return descriptor_; }
  const EditSource& source() const noexcept { return *source_; }
  GeneratorBridge& bridge() noexcept { return *bridge_; }

 private:
  struct Slot {
    mutable std::shared_mutex mu;
    Session session;
  };
  std::shared_ptr<Slot> slot(const std::string& id) const;
  void validate(const EditSpec& spec) const;

  std::shared_ptr<GeneratorBridge> bridge_;
  std::shared_ptr<const EditSource> source_;
  std::string basis_ref_;
  GeneratorDescriptor descriptor_;

  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t next_id_ = 1;
};

class SessionNotFound : public Error {
 public:
  using Error::Error;
};

}  // namespace layerpca
