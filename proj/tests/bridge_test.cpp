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

#include <gtest/gtest.h>

#include <memory>

#include "layerpca/bridge.hpp"
#include "layerpca/errors.hpp"
#include "http_fixture.hpp"
#include "test_util.hpp"

namespace layerpca {
namespace {

using testing::LocalServer;

Eigen::MatrixXd to_float(const Eigen::MatrixXd& m) { return m.cast<float>().cast<double>(); }

LayeredLatentState float_state(LayeredLatentState s) {
  s.base = to_float(s.base);
  for (auto& v : s.per_layer) v = to_float(v);
  return s;
}

// Shared black-box protocol suite: every bridge answers the same calls with
// the same shapes and, for float-representable inputs, the same values as
// the in-process reference (the wire carries float32).
class ConformanceTest : public ::testing::TestWithParam<std::tuple<LatentSpace, bool>> {
 protected:
  void SetUp() override {
    const auto [family, over_http] = GetParam();
    reference_ = std::make_shared<ToyBridge>(GeneratorDescriptor::toy(family, 21));
    if (over_http) {
      server_ = std::make_unique<LocalServer>();
      mount_bridge_routes(server_->server(), *reference_);
      server_->start();
      bridge_ = std::make_unique<HttpBridge>(server_->url());
    } else {
      bridge_ = std::make_unique<ToyBridge>(GeneratorDescriptor::toy(family, 21));
    }
  }
  void TearDown() override {
    bridge_.reset();
    server_.reset();
  }

  // What the bridge under test should return for a reference result.
  Eigen::MatrixXd wire(const Eigen::MatrixXd& m) const {
    return std::get<1>(GetParam()) ? to_float(m) : m;
  }

  std::shared_ptr<ToyBridge> reference_;
  std::unique_ptr<LocalServer> server_;
  std::unique_ptr<GeneratorBridge> bridge_;
};

TEST_P(ConformanceTest, DescriptorMatchesReference) {
  const auto d = bridge_->descriptor();
  EXPECT_EQ(d, reference_->descriptor());
  EXPECT_EQ(descriptor_hash(d), descriptor_hash(reference_->descriptor()));
  EXPECT_EQ(descriptor_hash(d).size(), 16u);
}

TEST_P(ConformanceTest, SampleShapesAndDeterminism) {
  const auto d = bridge_->descriptor();
  const auto a = bridge_->sample(7, 3, 0);
  ASSERT_EQ(a.rows(), 7);
  ASSERT_EQ(a.cols(), Eigen::Index(d.latent_dim));
  EXPECT_EQ(a, bridge_->sample(7, 3, 0));
  EXPECT_EQ(a.bottomRows(2), bridge_->sample(2, 3, 5));
  EXPECT_EQ(a, wire(reference_->sample(7, 3, 0)));
}

TEST_P(ConformanceTest, MapMatchesReference) {
  const auto z = to_float(reference_->sample(5, 4, 0));
  if (bridge_->descriptor().family == LatentSpace::skip) {
    EXPECT_ANY_THROW(bridge_->map(z));
    return;
  }
  const auto w = bridge_->map(z);
  ASSERT_EQ(w.rows(), 5);
  ASSERT_EQ(w.cols(), 16);
  EXPECT_EQ(w, wire(reference_->map(z)));
}

TEST_P(ConformanceTest, FeaturesShapesAndTaps) {
  const auto z = to_float(reference_->sample(3, 5, 0));
  for (std::size_t layer = 0; layer < 6; ++layer) {
    for (Tap tap : {Tap::pre, Tap::post}) {
      const auto f = bridge_->features(z, layer, tap);
      ASSERT_EQ(f.rows(), 3);
      ASSERT_EQ(std::size_t(f.cols()), reference_->descriptor().feature_size(layer));
      EXPECT_EQ(f, wire(reference_->features(z, layer, tap)));
    }
  }
  EXPECT_ANY_THROW(bridge_->features(z, 6, Tap::post));
}

TEST_P(ConformanceTest, SynthesizeAndCapture) {
  const Eigen::VectorXd z = to_float(reference_->sample(1, 6, 0)).row(0).transpose();
  const auto s = float_state(reference_->initial_state(z));
  const auto img = bridge_->synthesize(s);
  EXPECT_EQ(img.dims, (std::vector<std::uint32_t>{32, 32, 3}));
  EXPECT_EQ(img, reference_->synthesize(s));
  EXPECT_EQ(bridge_->synthesize(s), img);

  const auto cap = bridge_->capture(s, 2, Tap::pre);
  EXPECT_EQ(cap.dims, (std::vector<std::uint32_t>{8, 8, 8}));
  EXPECT_EQ(cap, reference_->capture(s, 2, Tap::pre));
  EXPECT_ANY_THROW(bridge_->capture(s, 9, Tap::post));
}

TEST_P(ConformanceTest, AllLayersAtBaseIsUneditedPass) {
  const Eigen::VectorXd z = to_float(reference_->sample(1, 8, 0)).row(0).transpose();
  const auto s = float_state(bridge_->initial_state(z));
  for (const auto& v : s.per_layer) EXPECT_EQ(v, s.base);
  EXPECT_EQ(bridge_->synthesize(s), reference_->synthesize(float_state(reference_->initial_state(z))));
}

TEST_P(ConformanceTest, PerLayerInputsIndependentlySettable) {
  const auto z = to_float(reference_->sample(2, 9, 0));
  const auto a = float_state(reference_->initial_state(z.row(0).transpose()));
  const auto b = float_state(reference_->initial_state(z.row(1).transpose()));
  auto mixed = style_mix(a, b, 0, 5);
  mixed.base = b.base;
  EXPECT_EQ(bridge_->synthesize(mixed), bridge_->synthesize(b));
  auto late = style_mix(a, b, 4, 5);
  EXPECT_EQ(bridge_->capture(late, 3, Tap::post), bridge_->capture(a, 3, Tap::post));
  EXPECT_NE(bridge_->capture(late, 4, Tap::post), bridge_->capture(a, 4, Tap::post));
}

TEST_P(ConformanceTest, MismatchedStateRejected) {
  const Eigen::VectorXd z = to_float(reference_->sample(1, 6, 0)).row(0).transpose();
  auto s = float_state(reference_->initial_state(z));
  s.per_layer.pop_back();
  EXPECT_ANY_THROW(bridge_->synthesize(s));
}

INSTANTIATE_TEST_SUITE_P(
    Bridges, ConformanceTest,
    ::testing::Combine(::testing::Values(LatentSpace::style, LatentSpace::skip), ::testing::Bool()),
    [](const auto& info) {
      return std::string(to_string(std::get<0>(info.param))) +
             (std::get<1>(info.param) ? "Http" : "InProcess");
    });

TEST(HandshakeTest, ToyEndpointLoopback) {
  EXPECT_EQ(bridge_handshake("toy:style?seed=7&linear=1"),
            GeneratorDescriptor::toy(LatentSpace::style, 7, true));
  EXPECT_EQ(bridge_handshake("toy:skip"), GeneratorDescriptor::toy(LatentSpace::skip, 0));
  EXPECT_THROW(bridge_handshake("toy:pixel"), ProtocolError);
  EXPECT_THROW(bridge_handshake("toy:style?depth=3"), ProtocolError);
}

TEST(HandshakeTest, HttpLoopback) {
  ToyBridge toy(GeneratorDescriptor::toy(LatentSpace::skip, 4));
  LocalServer srv;
  mount_bridge_routes(srv.server(), toy);
  srv.start();
  EXPECT_EQ(bridge_handshake(srv.url()), toy.descriptor());
}

TEST(HandshakeTest, VersionZeroRejected) {
  LocalServer srv;
  srv.server().Post("/v1/descriptor", [](const httplib::Request&, httplib::Response& res) {
    auto j = descriptor_to_json(GeneratorDescriptor::toy(LatentSpace::style, 1));
    j["protocol_version"] = 0;
    res.set_content(j.dump(), "application/json");
  });
  srv.start();
  EXPECT_THROW(bridge_handshake(srv.url()), ProtocolError);
}

TEST(HandshakeTest, StyleWithoutStyleDimIsMalformed) {
  LocalServer srv;
  srv.server().Post("/v1/descriptor", [](const httplib::Request&, httplib::Response& res) {
    auto j = descriptor_wire_json(GeneratorDescriptor::toy(LatentSpace::style, 1));
    j.erase("d_w");
    res.set_content(j.dump(), "application/json");
  });
  srv.start();
  try {
    bridge_handshake(srv.url());
    FAIL() << "accepted";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.pointer(), "/d_w");
  }
}

TEST(HandshakeTest, WireParsing) {
  auto j = descriptor_wire_json(GeneratorDescriptor::toy(LatentSpace::skip, 2));
  EXPECT_EQ(parse_descriptor_wire(j), GeneratorDescriptor::toy(LatentSpace::skip, 2));
  auto no_version = j;
  no_version.erase("protocol_version");
  EXPECT_THROW(parse_descriptor_wire(no_version), ProtocolError);
  auto bad_dims = j;
  bad_dims["layer_feature_dims"][3] = {8, 5, 5};
  EXPECT_THROW(parse_descriptor_wire(bad_dims), SchemaError);
  auto missing = j;
  missing.erase("image_dims");
  EXPECT_THROW(parse_descriptor_wire(missing), SchemaError);
}

TEST(HttpBridgeTest, ServerErrorsSurfaceAsBridgeErrors) {
  LocalServer srv;
  srv.server().Post("/v1/sample", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;
  });
  srv.start();
  HttpBridge b(srv.url());
  EXPECT_THROW(b.sample(1, 0, 0), BridgeError);
  EXPECT_THROW(b.descriptor(), BridgeError);  // 404
}

TEST(HttpBridgeTest, UnreachableEndpoint) {
  int port = 0;
  {
    LocalServer probe;
    probe.start();
    port = probe.port();
  }
  HttpBridge b("http://127.0.0.1:" + std::to_string(port));
  EXPECT_THROW(b.descriptor(), BridgeError);
}

TEST(StateWireTest, EncodeDecode) {
  auto s = LayeredLatentState::fresh(LatentSpace::skip, Eigen::VectorXd::LinSpaced(4, 0, 3), 3);
  s.per_layer[1][2] = -5.5;
  const auto t = encode_state(s);
  EXPECT_EQ(t.dims, (std::vector<std::uint32_t>{4, 4}));
  EXPECT_EQ(decode_state(t, LatentSpace::skip), s);
  EXPECT_THROW(decode_state(TensorBlock({1, 4}), LatentSpace::skip), DimensionError);
}

}  // namespace
}  // namespace layerpca
