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
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "json.hpp"

#include "layerpca/edit.hpp"
#include "layerpca/tensor.hpp"
#include "layerpca/toy_generator.hpp"

namespace httplib {
class Server;
class Client;
}  // namespace httplib

namespace layerpca {

inline constexpr int kBridgeProtocolVersion = 1;

// Generator-bridge protocol. Over HTTP:
//   POST /v1/descriptor                   -> descriptor JSON (+ protocol_version)
//   POST /v1/sample   X-Count, X-Seed, X-Offset            -> GSPC [N, d_z]
//   POST /v1/map      GSPC [N, d_z]                        -> GSPC [N, d_w]
//   POST /v1/features?layer=i&tap=pre|post  GSPC [N, d_z]  -> GSPC [N, size_i]
//   POST /v1/synthesize[?capture=i&tap=..]  GSPC state     -> GSPC image [H, W, 3]
//                                                            (or layer i [C, H, W])
// A state travels as a [L + 1, d] tensor (row 0 = base) with the space in
// the X-Latent-Space header.
class GeneratorBridge {
 public:
  virtual ~GeneratorBridge() = default;

  virtual GeneratorDescriptor descriptor() = 0;
  virtual Eigen::MatrixXd sample(std::size_t count, std::uint64_t seed,
                                 std::uint64_t offset = 0) = 0;
  virtual Eigen::MatrixXd map(const Eigen::MatrixXd& latents) = 0;
  virtual Eigen::MatrixXd features(const Eigen::MatrixXd& latents, std::size_t layer,
                                   Tap tap) = 0;
  virtual TensorBlock synthesize(const LayeredLatentState& state) = 0;
  virtual TensorBlock capture(const LayeredLatentState& state, std::size_t layer, Tap tap) = 0;

  // Fresh state for latent z: maps through M for the style family.
  LayeredLatentState initial_state(const Eigen::VectorXd& z);
};

// In-process bridge over a ToyGenerator.
class ToyBridge final : public GeneratorBridge {
 public:
  explicit ToyBridge(GeneratorDescriptor d) : gen_(std::make_shared<ToyGenerator>(std::move(d))) {}
  explicit ToyBridge(std::shared_ptr<const ToyGenerator> g) : gen_(std::move(g)) {}

  GeneratorDescriptor descriptor() override { return gen_->descriptor(); }
  Eigen::MatrixXd sample(std::size_t count, std::uint64_t seed, std::uint64_t offset) override;
  Eigen::MatrixXd map(const Eigen::MatrixXd& latents) override;
  Eigen::MatrixXd features(const Eigen::MatrixXd& latents, std::size_t layer, Tap tap) override;
  TensorBlock synthesize(const LayeredLatentState& state) override;
  TensorBlock capture(const LayeredLatentState& state, std::size_t layer, Tap tap) override;

  const ToyGenerator& generator() const noexcept { return *gen_; }

 private:
  std::shared_ptr<const ToyGenerator> gen_;
};

// Client for a bridge at "http://host:port".
class HttpBridge final : public GeneratorBridge {
 public:
  explicit HttpBridge(const std::string& url);
  ~HttpBridge() override;

  GeneratorDescriptor descriptor() override;
  Eigen::MatrixXd sample(std::size_t count, std::uint64_t seed, std::uint64_t offset) override;
  Eigen::MatrixXd map(const Eigen::MatrixXd& latents) override;
  Eigen::MatrixXd features(const Eigen::MatrixXd& latents, std::size_t layer, Tap tap) override;
  TensorBlock synthesize(const LayeredLatentState& state) override;
  TensorBlock capture(const LayeredLatentState& state, std::size_t layer, Tap tap) override;

 private:
  std::string post(const std::string& path, const std::string& body,
                   const std::vector<std::pair<std::string, std::string>>& headers = {});

  std::unique_ptr<httplib::Client> client_;
  std::mutex mu_;
};

nlohmann::json descriptor_wire_json(const GeneratorDescriptor& d);
// Validates protocol_version and the descriptor schema.
GeneratorDescriptor parse_descriptor_wire(const nlohmann::json& j);

// "toy:style?seed=7&linear=1", "toy:skip", or "http://host:port".
std::unique_ptr<GeneratorBridge> open_bridge(const std::string& endpoint);
GeneratorDescriptor bridge_handshake(const std::string& endpoint);

// FNV-1a 64 of the canonical descriptor JSON, as 16 hex digits.
std::string descriptor_hash(const GeneratorDescriptor& d);

TensorBlock encode_state(const LayeredLatentState& s);
LayeredLatentState decode_state(const TensorBlock& t, LatentSpace space);

// Registers the bridge endpoints on `server`. The bridge must outlive it.
void mount_bridge_routes(httplib::Server& server, GeneratorBridge& bridge);

}  // namespace layerpca
