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

#include "layerpca/session.hpp"

#include <mutex>

#include "layerpca/edit_set.hpp"
#include "layerpca/errors.hpp"

namespace layerpca {

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::Index source_components(const EditSource& s) {
  return std::visit([](const auto& b) { return b.components(); }, s);
}

Eigen::Index source_dim(const EditSource& s) {
  return std::visit([](const auto& b) { return b.dim(); }, s);
}

LayeredLatentState apply_spec(const LayeredLatentState& state, const EditSpec& spec,
                              const EditSource& source) {
  return std::visit([&](const auto& b) { return apply_edit_layerwise(state, spec, b); }, source);
}

LayeredLatentState replay(const LayeredLatentState& anchor, const std::vector<EditSpec>& edits,
                          const EditSource& source) {
  LayeredLatentState s = anchor;
  for (const auto& e : edits) s = apply_spec(s, e, source);
  return s;
}

nlohmann::json session_to_json(const Session& s) {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : s.edits) edits.push_back(edit_spec_to_json(e));
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& v : s.anchor.per_layer) layers.push_back(vector_json(v));
  return {{"id", s.id},
          {"descriptor", descriptor_to_json(s.descriptor)},
          {"basis", s.basis_ref},
          {"anchor_seed", s.anchor_seed},
          {"anchor",
           {{"space", std::string(to_string(s.anchor.space))},
            {"base", vector_json(s.anchor.base)},
            {"per_layer", std::move(layers)}}},
          {"edits", std::move(edits)}};
}

Session session_from_json(const nlohmann::json& j) {
  Session s;
  try {
    s.id = j.value("id", std::string{});
    s.descriptor = descriptor_from_json(j.at("descriptor"));
    s.basis_ref = j.value("basis", std::string{});
    s.anchor_seed = j.at("anchor_seed").get<std::uint64_t>();
    const auto& a = j.at("anchor");
    s.anchor.space = latent_space_from_string(a.at("space").get<std::string>());
    s.anchor.base = vector_from_json(a.at("base"));
    for (const auto& v : a.at("per_layer")) s.anchor.per_layer.push_back(vector_from_json(v));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("/", std::string("malformed session snapshot: ") + e.what());
  }
  const auto& edits = j.at("edits");
  for (std::size_t i = 0; i < edits.size(); ++i) {
    s.edits.push_back(edit_spec_from_json(edits[i], "/edits/" + std::to_string(i)));
  }
  return s;
}

SessionManager::SessionManager(std::shared_ptr<GeneratorBridge> bridge,
                               std::shared_ptr<const EditSource> source, std::string basis_ref)
    : bridge_(std::move(bridge)),
      source_(std::move(source)),
      basis_ref_(std::move(basis_ref)),
      descriptor_(bridge_->descriptor()) {
  if (source_dim(*source_) != static_cast<Eigen::Index>(descriptor_.state_dim())) {
    throw DimensionError("edit directions have dim " + std::to_string(source_dim(*source_)) +
                         ", generator state dim is " + std::to_string(descriptor_.state_dim()));
  }
}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& id) const {
  std::shared_lock lock(mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
  return it->second;
}

void SessionManager::validate(const EditSpec& spec) const {
  if (spec.space != descriptor_.family) {
    throw RangeError("edit space " + std::string(to_string(spec.space)) +
                     " does not match generator family");
  }
  if (spec.component < 0 || spec.component >= source_components(*source_)) {
    throw RangeError("component " + std::to_string(spec.component) + " out of range");
  }
  if (!spec.layers.all &&
      (spec.layers.start > spec.layers.end || spec.layers.end >= descriptor_.layer_count())) {
    throw RangeError("invalid layer range for " + std::to_string(descriptor_.layer_count()) +
                     " layers");
  }
}

std::string SessionManager::create(std::uint64_t anchor_seed) {
  const Eigen::VectorXd z = bridge_->sample(1, anchor_seed, 0).row(0).transpose();
  auto s = std::make_shared<Slot>();
  s->session.descriptor = descriptor_;
  s->session.basis_ref = basis_ref_;
  s->session.anchor_seed = anchor_seed;
  s->session.anchor = bridge_->initial_state(z);
  s->session.current = s->session.anchor;

  std::unique_lock lock(mu_);
  s->session.id = "s" + std::to_string(next_id_++);
  sessions_.emplace(s->session.id, s);
  return s->session.id;
}

std::string SessionManager::restore(const nlohmann::json& snapshot) {
  Session restored = session_from_json(snapshot);
  if (restored.descriptor != descriptor_) {
    throw DimensionError("snapshot was taken against a different generator");
  }
  for (const auto& e : restored.edits) validate(e);
  restored.current = replay(restored.anchor, restored.edits, *source_);
  auto s = std::make_shared<Slot>();
  s->session = std::move(restored);

  std::unique_lock lock(mu_);
  s->session.id = "s" + std::to_string(next_id_++);
  sessions_.emplace(s->session.id, s);
  return s->session.id;
}

bool SessionManager::remove(const std::string& id) {
  std::unique_lock lock(mu_);
  return sessions_.erase(id) > 0;
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

Session SessionManager::snapshot(const std::string& id) const {
  auto s = slot(id);
  std::shared_lock lock(s->mu);
  return s->session;
}

std::vector<EditSpec> SessionManager::push_edit(const std::string& id, const EditSpec& spec) {
  validate(spec);
  auto s = slot(id);
  std::unique_lock lock(s->mu);
  s->session.current = apply_spec(s->session.current, spec, *source_);
  s->session.edits.push_back(spec);
  return s->session.edits;
}

std::vector<EditSpec> SessionManager::pop_edit(const std::string& id) {
  auto s = slot(id);
  std::unique_lock lock(s->mu);
  if (!s->session.edits.empty()) {
    s->session.edits.pop_back();
    s->session.current = replay(s->session.anchor, s->session.edits, *source_);
  }
  return s->session.edits;
}

std::vector<EditSpec> SessionManager::edits(const std::string& id) const {
  auto s = slot(id);
  std::shared_lock lock(s->mu);
  return s->session.edits;
}

TensorBlock SessionManager::render(const std::string& id, const RenderRequest& request) {
  for (const auto& e : request.overrides) validate(e);
  auto s = slot(id);
  LayeredLatentState state;
  if (request.commit) {
    std::unique_lock lock(s->mu);
    for (const auto& e : request.overrides) {
      s->session.current = apply_spec(s->session.current, e, *source_);
      s->session.edits.push_back(e);
    }
    state = s->session.current;
  } else {
    std::shared_lock lock(s->mu);
    state = s->session.current;
  }
  if (!request.commit) {
    for (const auto& e : request.overrides) state = apply_spec(state, e, *source_);
  }
  if (request.capture_layer) return bridge_->capture(state, *request.capture_layer, request.tap);
  return bridge_->synthesize(state);
}

}  // namespace layerpca
