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

#include "layerpca/service.hpp"

#include <fstream>
#include <regex>

#include "httplib.h"

#include "layerpca/edit_set.hpp"
#include "layerpca/errors.hpp"
#include "layerpca/png.hpp"

namespace layerpca {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, const json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& what,
                const std::string& pointer = {}) {
  json j = {{"error", what}};
  if (!pointer.empty()) j["pointer"] = pointer;
  send_json(res, j, status);
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const SessionNotFound& e) {
      send_error(res, 404, e.what());
    } catch (const SchemaError& e) {
      send_error(res, 400, e.what(), e.pointer());
    } catch (const json::exception& e) {
      send_error(res, 400, e.what());
    } catch (const RangeError& e) {
      send_error(res, 400, e.what());
    } catch (const DimensionError& e) {
      send_error(res, 400, e.what());
    } catch (const BridgeError& e) {
      send_error(res, 502, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("invalid JSON: ") + e.what());
  }
}

json stack_json(const std::vector<EditSpec>& edits) {
  json arr = json::array();
  for (const auto& e : edits) arr.push_back(edit_spec_to_json(e));
  return arr;
}

bool wants_png(const httplib::Request& req) {
  if (req.has_param("format")) return req.get_param_value("format") == "png";
  return req.has_header("Accept") &&
         req.get_header_value("Accept").find("image/png") != std::string::npos;
}

void send_tensor(const httplib::Request& req, httplib::Response& res, const TensorBlock& t) {
  if (wants_png(req)) {
    res.set_content(encode_png(t), "image/png");
  } else {
    res.set_content(encode_tensor(t), "application/x-gspc");
  }
}

RenderRequest render_request(const json& body) {
  RenderRequest r;
  for (const auto& [key, _] : body.items()) {
    if (key != "overrides" && key != "commit" && key != "capture") {
      throw SchemaError("/" + key, "unknown key");
    }
  }
  if (body.contains("overrides")) {
    const auto& o = body.at("overrides");
    if (!o.is_array()) throw SchemaError("/overrides", "expected an array");
    for (std::size_t i = 0; i < o.size(); ++i) {
      r.overrides.push_back(edit_spec_from_json(o[i], "/overrides/" + std::to_string(i)));
    }
  }
  if (body.contains("commit")) {
    if (!body.at("commit").is_boolean()) throw SchemaError("/commit", "expected a boolean");
    r.commit = body.at("commit").get<bool>();
  }
  if (body.contains("capture")) {
    const auto& c = body.at("capture");
    r.capture_layer = c.at("layer").get<std::size_t>();
    if (c.contains("tap")) r.tap = c.at("tap").get<std::string>() == "pre" ? Tap::pre : Tap::post;
  }
  return r;
}

std::filesystem::path editset_path(const ServiceConfig& cfg, const std::string& name) {
  static const std::regex safe(R"([A-Za-z0-9_.-]+)");
  if (!cfg.editset_dir) throw RangeError("service has no edit-set directory");
  if (!std::regex_match(name, safe) || name.front() == '.') {
    throw RangeError("invalid edit-set name '" + name + "'");
  }
  return *cfg.editset_dir / (name + ".json");
}

}  // namespace

void mount_service_routes(httplib::Server& server, SessionManager& sessions,
                          const ServiceConfig& config_in) {
  // Handlers outlive this call, so they share a copy of the config.
  const auto cfg = std::make_shared<const ServiceConfig>(config_in);
  server.Post("/v1/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                std::string id;
                if (body.contains("snapshot")) {
                  id = sessions.restore(body.at("snapshot"));
                } else {
                  id = sessions.create(body.value("seed", std::uint64_t{0}));
                }
                send_json(res, {{"id", id}, {"descriptor", descriptor_to_json(sessions.descriptor())}},
                          201);
              }));
  server.Get("/v1/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, sessions.ids());
             }));
  server.Get(R"(/v1/sessions/([^/]+))",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, session_to_json(sessions.snapshot(req.matches[1])));
             }));
  server.Delete(R"(/v1/sessions/([^/]+))",
                guarded([&](const httplib::Request& req, httplib::Response& res) {
                  if (!sessions.remove(req.matches[1])) {
                    throw SessionNotFound("no session '" + std::string(req.matches[1]) + "'");
                  }
                  res.status = 204;
                }));
  server.Post(R"(/v1/sessions/([^/]+)/edits)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto spec = edit_spec_from_json(parse_body(req));
                send_json(res, stack_json(sessions.push_edit(req.matches[1], spec)));
              }));
  server.Get(R"(/v1/sessions/([^/]+)/edits)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, stack_json(sessions.edits(req.matches[1])));
             }));
  server.Delete(R"(/v1/sessions/([^/]+)/edits)",
                guarded([&](const httplib::Request& req, httplib::Response& res) {
                  send_json(res, stack_json(sessions.pop_edit(req.matches[1])));
                }));
  server.Post(R"(/v1/sessions/([^/]+)/render)",
              guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto request = render_request(parse_body(req));
                send_tensor(req, res, sessions.render(req.matches[1], request));
              }));
  server.Get(R"(/v1/sessions/([^/]+)/render)",
             guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_tensor(req, res, sessions.render(req.matches[1], RenderRequest{}));
             }));

  server.Get("/v1/components", guarded([&](const httplib::Request&, httplib::Response& res) {
               const auto& src = sessions.source();
               json j = {{"K", source_components(src)},
                         {"dim", source_dim(src)},
                         {"layer_count", sessions.descriptor().layer_count()},
                         {"space", std::string(to_string(sessions.descriptor().family))}};
               std::vector<std::string> names;
               for (Eigen::Index k = 0; k < source_components(src); ++k) {
                 names.push_back("PC" + std::to_string(k));
               }
               j["names"] = names;
               if (const auto* b = std::get_if<PrincipalBasis>(&src)) {
                 j["kind"] = "basis";
                 j["variances"] = std::vector<double>(b->variances.data(),
                                                      b->variances.data() + b->variances.size());
               } else {
                 const auto& d = std::get<PrincipalDirections>(src);
                 j["kind"] = "directions";
                 j["source_layer"] = d.source_layer;
               }
               send_json(res, j);
             }));

  server.Get("/v1/editsets", guarded([&, cfg](const httplib::Request&, httplib::Response& res) {
               json names = json::array();
               if (cfg->editset_dir && std::filesystem::exists(*cfg->editset_dir)) {
                 for (const auto& e : std::filesystem::directory_iterator(*cfg->editset_dir)) {
                   // A .json next to a same-named .gspc is a tensor sidecar.
                   auto tensor = e.path();
                   if (e.path().extension() == ".json" &&
                       !std::filesystem::exists(tensor.replace_extension(".gspc"))) {
                     names.push_back(e.path().stem().string());
                   }
                 }
               }
               send_json(res, names);
             }));
  server.Get(R"(/v1/editsets/([^/]+))",
             guarded([&, cfg](const httplib::Request& req, httplib::Response& res) {
               const auto path = editset_path(*cfg, req.matches[1]);
               if (!std::filesystem::exists(path)) {
                 send_error(res, 404, "no edit set '" + std::string(req.matches[1]) + "'");
                 return;
               }
               EditSetContext ctx;
               ctx.layer_count = sessions.descriptor().layer_count();
               send_json(res, edit_set_to_json(load_edit_set(path, ctx)));
             }));
  server.Put(R"(/v1/editsets/([^/]+))",
             guarded([&, cfg](const httplib::Request& req, httplib::Response& res) {
               const auto path = editset_path(*cfg, req.matches[1]);
               auto tensor = path;
               if (std::filesystem::exists(tensor.replace_extension(".gspc"))) {
                 send_error(res, 409, "name is taken by a tensor sidecar");
                 return;
               }
               const auto set =
                   edit_set_from_json(parse_body(req), sessions.descriptor().layer_count());
               for (std::size_t i = 0; i < set.edits.size(); ++i) {
                 if (set.edits[i].component >= source_components(sessions.source())) {
                   throw SchemaError("/edits/" + std::to_string(i) + "/component",
                                     "exceeds component count");
                 }
               }
               std::filesystem::create_directories(path.parent_path());
               save_edit_set(set, path);
               send_json(res, edit_set_to_json(set));
             }));
}

}  // namespace layerpca
