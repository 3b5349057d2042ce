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

#include "layerpca/edit_set.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "layerpca/errors.hpp"

namespace layerpca {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& ptr, const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) throw SchemaError(ptr.empty() ? "/" : ptr, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!required.contains(key) && !optional.contains(key)) {
      throw SchemaError(ptr + "/" + key, "unknown key");
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) throw SchemaError(ptr + "/" + key, "missing required key");
  }
}

std::string get_string(const json& obj, const std::string& ptr, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw SchemaError(ptr + "/" + key, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw SchemaError(ptr, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(ptr, "expected a finite number");
  return d;
}

std::int64_t get_index(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) throw SchemaError(ptr, "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < 0) throw SchemaError(ptr, "expected a non-negative integer");
  return i;
}

LatentSpace get_space(const json& obj, const std::string& ptr) {
  const auto s = get_string(obj, ptr, "space");
  if (s == "style") return LatentSpace::style;
  if (s == "skip") return LatentSpace::skip;
  throw SchemaError(ptr + "/space", "expected \"style\" or \"skip\"");
}

LayerRange get_layers(const json& obj, const std::string& ptr,
                      std::optional<std::size_t> layer_count) {
  const auto& end = obj.at("layer_end");
  const auto& start = obj.at("layer_start");
  if (end.is_string()) {
    if (end.get<std::string>() != "all") {
      throw SchemaError(ptr + "/layer_end", "expected an integer or \"all\"");
    }
    if (!(start.is_string() && start.get<std::string>() == "all") &&
        !(start.is_number_integer() && start.get<std::int64_t>() == 0)) {
      throw SchemaError(ptr + "/layer_start", "must be 0 or \"all\" when layer_end is \"all\"");
    }
    return LayerRange::every();
  }
  const auto s = get_index(start, ptr + "/layer_start");
  const auto e = get_index(end, ptr + "/layer_end");
  if (e < s) throw SchemaError(ptr + "/layer_end", "layer_end < layer_start");
  if (layer_count && static_cast<std::size_t>(e) >= *layer_count) {
    throw SchemaError(ptr + "/layer_end", "layer_end >= layer count " + std::to_string(*layer_count));
  }
  return LayerRange::span(static_cast<std::size_t>(s), static_cast<std::size_t>(e));
}

void put_layers(json& obj, const LayerRange& r) {
  if (r.all) {
    obj["layer_start"] = 0;
    obj["layer_end"] = "all";
  } else {
    obj["layer_start"] = r.start;
    obj["layer_end"] = r.end;
  }
}

}  // namespace

json edit_set_to_json(const EditSet& set) {
  json edits = json::array();
  for (const auto& e : set.edits) {
    json j = {{"name", e.name},
              {"component", e.component},
              {"space", std::string(to_string(e.space))},
              {"sigma_default", e.sigma_default},
              {"sigma_range", {e.sigma_range.first, e.sigma_range.second}}};
    put_layers(j, e.layers);
    edits.push_back(std::move(j));
  }
  return {{"model", set.model}, {"basis", set.basis}, {"edits", std::move(edits)}};
}

EditSet edit_set_from_json(const json& doc, std::optional<std::size_t> layer_count) {
  require_keys(doc, "", {"model", "basis", "edits"});
  EditSet set;
  set.model = get_string(doc, "", "model");
  set.basis = get_string(doc, "", "basis");
  const auto& edits = doc.at("edits");
  if (!edits.is_array()) throw SchemaError("/edits", "expected an array");
  for (std::size_t i = 0; i < edits.size(); ++i) {
    const std::string ptr = "/edits/" + std::to_string(i);
    const auto& j = edits[i];
    require_keys(j, ptr,
                 {"name", "component", "layer_start", "layer_end", "space", "sigma_default"},
                 {"sigma_range"});
    EditEntry e;
    e.name = get_string(j, ptr, "name");
    e.component = static_cast<Eigen::Index>(get_index(j.at("component"), ptr + "/component"));
    e.layers = get_layers(j, ptr, layer_count);
    e.space = get_space(j, ptr);
    e.sigma_default = get_number(j.at("sigma_default"), ptr + "/sigma_default");
    if (j.contains("sigma_range")) {
      const auto& r = j.at("sigma_range");
      if (!r.is_array() || r.size() != 2) {
        throw SchemaError(ptr + "/sigma_range", "expected [lo, hi]");
      }
      e.sigma_range = {get_number(r[0], ptr + "/sigma_range/0"),
                       get_number(r[1], ptr + "/sigma_range/1")};
      if (e.sigma_range.first > e.sigma_range.second) {
        throw SchemaError(ptr + "/sigma_range", "lo > hi");
      }
    }
    set.edits.push_back(std::move(e));
  }
  return set;
}

void save_edit_set(const EditSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write edit set " + path.string());
  out << edit_set_to_json(set).dump(2) << '\n';
  if (!out) throw IoError("failed writing edit set " + path.string());
}

EditSet load_edit_set(const std::filesystem::path& path, const EditSetContext& ctx) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edit set " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("invalid JSON: ") + e.what());
  }
  EditSet set = edit_set_from_json(doc, ctx.layer_count);

  auto basis_path = std::filesystem::path(set.basis);
  if (basis_path.is_relative()) basis_path = path.parent_path() / basis_path;
  auto sidecar = basis_path;
  sidecar.replace_extension(".json");
  std::ifstream side(sidecar);
  if (!side) {
    if (ctx.require_basis) throw IoError("edit set basis not found: " + basis_path.string());
    return set;
  }
  const auto meta = json::parse(side);
  const auto dim = meta.at("dim").get<Eigen::Index>();
  const auto k = meta.at("K").get<Eigen::Index>();
  if (ctx.latent_dim && *ctx.latent_dim != dim) {
    throw DimensionError("edit set basis has dim " + std::to_string(dim) + ", model expects " +
                         std::to_string(*ctx.latent_dim));
  }
  for (std::size_t i = 0; i < set.edits.size(); ++i) {
    if (set.edits[i].component >= k) {
      throw DimensionError("/edits/" + std::to_string(i) + "/component: basis has only " +
                           std::to_string(k) + " components");
    }
  }
  return set;
}

json edit_spec_to_json(const EditSpec& spec) {
  json j = {{"name", spec.name},
            {"component", spec.component},
            {"space", std::string(to_string(spec.space))},
            {"sigma", spec.sigma}};
  put_layers(j, spec.layers);
  return j;
}

EditSpec edit_spec_from_json(const json& doc, const std::string& pointer) {
  require_keys(doc, pointer, {"component", "layer_start", "layer_end", "space", "sigma"}, {"name"});
  EditSpec s;
  if (doc.contains("name")) s.name = get_string(doc, pointer, "name");
  s.component = static_cast<Eigen::Index>(get_index(doc.at("component"), pointer + "/component"));
  s.layers = get_layers(doc, pointer, std::nullopt);
  s.space = get_space(doc, pointer);
  s.sigma = get_number(doc.at("sigma"), pointer + "/sigma");
  return s;
}

}  // namespace layerpca
