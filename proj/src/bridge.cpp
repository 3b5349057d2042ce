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

#include "layerpca/bridge.hpp"

#include <cstdio>
#include <regex>

#include "httplib.h"

#include "layerpca/errors.hpp"

namespace layerpca {

namespace {

constexpr const char* kGspcMime = "application/x-gspc";

Tap tap_from_string(const std::string& s) {
  if (s == "pre") return Tap::pre;
  if (s == "post" || s.empty()) return Tap::post;
  throw ProtocolError("unknown tap point '" + s + "'");
}

const char* tap_name(Tap t) { return t == Tap::pre ? "pre" : "post"; }

std::uint64_t header_u64(const httplib::Request& req, const char* name, std::uint64_t fallback) {
  if (!req.has_header(name)) return fallback;
  return std::stoull(req.get_header_value(name));
}

void reply_error(httplib::Response& res, int status, const std::string& what) {
  res.status = status;
  res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
}

template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const FormatError& e) {
      reply_error(res, 400, e.what());
    } catch (const DimensionError& e) {
      reply_error(res, 400, e.what());
    } catch (const RangeError& e) {
      reply_error(res, 400, e.what());
    } catch (const ProtocolError& e) {
      reply_error(res, 400, e.what());
    } catch (const std::exception& e) {
      reply_error(res, 500, e.what());
    }
  };
}

}  // namespace

LayeredLatentState GeneratorBridge::initial_state(const Eigen::VectorXd& z) {
  const auto d = descriptor();
  if (d.family == LatentSpace::style) {
    const Eigen::MatrixXd w = map(z.transpose());
    return LayeredLatentState::fresh(LatentSpace::style, w.row(0).transpose(), d.layer_count());
  }
  return LayeredLatentState::fresh(LatentSpace::skip, z, d.layer_count());
}

Eigen::MatrixXd ToyBridge::sample(std::size_t count, std::uint64_t seed, std::uint64_t offset) {
  return gen_->sample_latents(count, seed, offset);
}

Eigen::MatrixXd ToyBridge::map(const Eigen::MatrixXd& latents) {
  return gen_->map_latents(latents);
}

Eigen::MatrixXd ToyBridge::features(const Eigen::MatrixXd& latents, std::size_t layer, Tap tap) {
  return gen_->features(latents, layer, tap);
}

TensorBlock ToyBridge::synthesize(const LayeredLatentState& state) {
  return gen_->image_tensor(gen_->synthesize(state));
}

TensorBlock ToyBridge::capture(const LayeredLatentState& state, std::size_t layer, Tap tap) {
  if (layer >= gen_->descriptor().layer_count()) throw RangeError("capture layer out of range");
  return gen_->feature_tensor(gen_->synthesize(state, layer), layer, tap);
}

nlohmann::json descriptor_wire_json(const GeneratorDescriptor& d) {
  auto j = descriptor_to_json(d);
  j["protocol_version"] = kBridgeProtocolVersion;
  return j;
}

GeneratorDescriptor parse_descriptor_wire(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("protocol_version") ||
      !j["protocol_version"].is_number_integer()) {
    throw ProtocolError("descriptor lacks an integer protocol_version");
  }
  const int v = j["protocol_version"].get<int>();
  if (v != kBridgeProtocolVersion) {
    throw ProtocolError("bridge protocol version " + std::to_string(v) + " unsupported (expected " +
                        std::to_string(kBridgeProtocolVersion) + ")");
  }
  auto d = descriptor_from_json(j);
  try {
    d.validate();
  } catch (const DimensionError& e) {
    throw SchemaError("/", std::string("malformed descriptor: ") + e.what());
  }
  return d;
}

TensorBlock encode_state(const LayeredLatentState& s) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s.layer_count() + 1), s.dim());
  m.row(0) = s.base.transpose();
  for (std::size_t i = 0; i < s.layer_count(); ++i) {
    m.row(static_cast<Eigen::Index>(i + 1)) = s.per_layer[i].transpose();
  }
  return to_tensor(m);
}

LayeredLatentState decode_state(const TensorBlock& t, LatentSpace space) {
  if (t.dims.size() != 2 || t.dims[0] < 2) {
    throw DimensionError("latent state tensor must be [L + 1, d] with L >= 1");
  }
  const Eigen::MatrixXd m = to_matrix(t);
  LayeredLatentState s;
  s.space = space;
  s.base = m.row(0).transpose();
  for (Eigen::Index r = 1; r < m.rows(); ++r) s.per_layer.push_back(m.row(r).transpose());
  return s;
}

std::string descriptor_hash(const GeneratorDescriptor& d) {
  const std::string canon = descriptor_to_json(d).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --- HTTP client -----------------------------------------------------------

HttpBridge::HttpBridge(const std::string& url) : client_(std::make_unique<httplib::Client>(url)) {
  client_->set_read_timeout(600, 0);
  client_->set_connection_timeout(5, 0);
}

HttpBridge::~HttpBridge() = default;

std::string HttpBridge::post(const std::string& path, const std::string& body,
                             const std::vector<std::pair<std::string, std::string>>& headers) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  std::lock_guard lock(mu_);
  auto res = client_->Post(path, h, body, kGspcMime);
  if (!res) {
    throw BridgeError("bridge request " + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BridgeError("bridge request " + path + " returned " + std::to_string(res->status) +
                      ": " + res->body);
  }
  return res->body;
}

GeneratorDescriptor HttpBridge::descriptor() {
  const auto body = post("/v1/descriptor", "");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("descriptor is not JSON: ") + e.what());
  }
  return parse_descriptor_wire(j);
}

Eigen::MatrixXd HttpBridge::sample(std::size_t count, std::uint64_t seed, std::uint64_t offset) {
  const auto body = post("/v1/sample", "",
                         {{"X-Count", std::to_string(count)},
                          {"X-Seed", std::to_string(seed)},
                          {"X-Offset", std::to_string(offset)}});
  return to_matrix(decode_tensor(body));
}

Eigen::MatrixXd HttpBridge::map(const Eigen::MatrixXd& latents) {
  return to_matrix(decode_tensor(post("/v1/map", encode_tensor(to_tensor(latents)))));
}

Eigen::MatrixXd HttpBridge::features(const Eigen::MatrixXd& latents, std::size_t layer, Tap tap) {
  const std::string path =
      "/v1/features?layer=" + std::to_string(layer) + "&tap=" + tap_name(tap);
  return to_matrix(decode_tensor(post(path, encode_tensor(to_tensor(latents)))));
}

TensorBlock HttpBridge::synthesize(const LayeredLatentState& state) {
  return decode_tensor(post("/v1/synthesize", encode_tensor(encode_state(state)),
                            {{"X-Latent-Space", std::string(to_string(state.space))}}));
}

TensorBlock HttpBridge::capture(const LayeredLatentState& state, std::size_t layer, Tap tap) {
  const std::string path =
      "/v1/synthesize?capture=" + std::to_string(layer) + "&tap=" + tap_name(tap);
  return decode_tensor(post(path, encode_tensor(encode_state(state)),
                            {{"X-Latent-Space", std::string(to_string(state.space))}}));
}

// --- HTTP server -----------------------------------------------------------

void mount_bridge_routes(httplib::Server& server, GeneratorBridge& bridge) {
  server.Post("/v1/descriptor", guarded([&bridge](const httplib::Request&, httplib::Response& res) {
                res.set_content(descriptor_wire_json(bridge.descriptor()).dump(),
                                "application/json");
              }));
  server.Post("/v1/sample", guarded([&bridge](const httplib::Request& req, httplib::Response& res) {
                const auto count = header_u64(req, "X-Count", 1);
                const auto seed = header_u64(req, "X-Seed", 0);
                const auto offset = header_u64(req, "X-Offset", 0);
                res.set_content(encode_tensor(to_tensor(bridge.sample(count, seed, offset))),
                                kGspcMime);
              }));
  server.Post("/v1/map", guarded([&bridge](const httplib::Request& req, httplib::Response& res) {
                const Eigen::MatrixXd z = to_matrix(decode_tensor(req.body));
                res.set_content(encode_tensor(to_tensor(bridge.map(z))), kGspcMime);
              }));
  server.Post("/v1/features",
              guarded([&bridge](const httplib::Request& req, httplib::Response& res) {
                if (!req.has_param("layer")) throw ProtocolError("missing layer parameter");
                const auto layer = std::stoul(req.get_param_value("layer"));
                const Tap tap = tap_from_string(req.get_param_value("tap"));
                const Eigen::MatrixXd z = to_matrix(decode_tensor(req.body));
                res.set_content(encode_tensor(to_tensor(bridge.features(z, layer, tap))),
                                kGspcMime);
              }));
  server.Post("/v1/synthesize",
              guarded([&bridge](const httplib::Request& req, httplib::Response& res) {
                const auto space = latent_space_from_string(
                    req.has_header("X-Latent-Space") ? req.get_header_value("X-Latent-Space")
                                                     : std::string(to_string(bridge.descriptor().family)));
                const auto state = decode_state(decode_tensor(req.body), space);
                if (req.has_param("capture")) {
                  const auto layer = std::stoul(req.get_param_value("capture"));
                  const Tap tap = tap_from_string(req.get_param_value("tap"));
                  res.set_content(encode_tensor(bridge.capture(state, layer, tap)), kGspcMime);
                } else {
                  res.set_content(encode_tensor(bridge.synthesize(state)), kGspcMime);
                }
              }));
}

// --- endpoints -------------------------------------------------------------

std::unique_ptr<GeneratorBridge> open_bridge(const std::string& endpoint) {
  if (endpoint.rfind("http://", 0) == 0) return std::make_unique<HttpBridge>(endpoint);

  static const std::regex toy_re(R"(toy:(style|skip)(\?(.*))?)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, toy_re)) {
    throw ProtocolError("unrecognized bridge endpoint '" + endpoint + "'");
  }
  std::uint64_t seed = 0;
  bool linear = false;
  const std::string query = m[3].str();
  static const std::regex kv_re(R"(([a-z_]+)=([^&]*))");
  for (auto it = std::sregex_iterator(query.begin(), query.end(), kv_re);
       it != std::sregex_iterator(); ++it) {
    const auto key = (*it)[1].str();
    const auto value = (*it)[2].str();
    if (key == "seed") {
      seed = std::stoull(value);
    } else if (key == "linear") {
      linear = value == "1" || value == "true";
    } else {
      throw ProtocolError("unknown toy endpoint option '" + key + "'");
    }
  }
  return std::make_unique<ToyBridge>(
      GeneratorDescriptor::toy(latent_space_from_string(m[1].str()), seed, linear));
}

GeneratorDescriptor bridge_handshake(const std::string& endpoint) {
  return open_bridge(endpoint)->descriptor();
}

}  // namespace layerpca
