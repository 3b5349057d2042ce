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

#include <filesystem>

#include "layerpca/pipeline.hpp"
#include "layerpca/service.hpp"
#include "http_fixture.hpp"

namespace layerpca {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layerpca_service_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    bridge_ = std::make_shared<ToyBridge>(GeneratorDescriptor::toy(LatentSpace::style, 13));
    FitOptions o;
    o.samples = 2000;
    o.batch_size = 1000;
    o.components = 8;
    const auto basis = pipeline_fit(*bridge_, o).basis;
    fs::create_directories(dir_);
    save_basis(basis, dir_ / "basis.gspc", {});
    sessions_ = std::make_unique<SessionManager>(
        bridge_, std::make_shared<const EditSource>(basis), "basis.gspc");
    mount_service_routes(server_.server(), *sessions_, {dir_});
    server_.start();
    client_ = std::make_unique<httplib::Client>(server_.url());
  }
  void TearDown() override {
    server_.stop();
    fs::remove_all(dir_);
  }

  std::string create(std::uint64_t seed) {
    auto res = client_->Post("/v1/sessions", json{{"seed", seed}}.dump(), "application/json");
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body).at("id").get<std::string>();
  }
  TensorBlock render(const std::string& id, const json& body) {
    auto res = client_->Post("/v1/sessions/" + id + "/render", body.dump(), "application/json");
    EXPECT_EQ(res->status, 200) << res->body;
    return decode_tensor(res->body);
  }

  fs::path dir_;
  std::shared_ptr<ToyBridge> bridge_;
  std::unique_ptr<SessionManager> sessions_;
  testing::LocalServer server_;
  std::unique_ptr<httplib::Client> client_;
};

json edit(Eigen::Index k, std::size_t start, std::size_t end, double sigma) {
  return {{"component", k}, {"layer_start", start}, {"layer_end", end}, {"space", "style"},
          {"sigma", sigma}};
}

TEST_F(ServiceTest, SessionLifecycle) {
  const auto id = create(5);
  auto list = client_->Get("/v1/sessions");
  EXPECT_EQ(json::parse(list->body), json::array({id}));
  auto snap = client_->Get("/v1/sessions/" + id);
  ASSERT_EQ(snap->status, 200);
  EXPECT_EQ(json::parse(snap->body).at("anchor_seed"), 5);
  EXPECT_EQ(client_->Delete("/v1/sessions/" + id)->status, 204);
  EXPECT_EQ(client_->Get("/v1/sessions/" + id)->status, 404);
  EXPECT_EQ(client_->Delete("/v1/sessions/" + id)->status, 404);
}

TEST_F(ServiceTest, RenderMatchesBridgeAndOverridesAreStateless) {
  const auto id = create(6);
  const auto anchor = render(id, json::object());
  EXPECT_EQ(anchor.dims, (std::vector<std::uint32_t>{32, 32, 3}));
  const Eigen::VectorXd z = bridge_->sample(1, 6, 0).row(0).transpose();
  EXPECT_EQ(anchor, bridge_->synthesize(bridge_->initial_state(z)));

  const auto zero = render(id, {{"overrides", {edit(0, 0, 5, 0.0), edit(3, 1, 2, 0.0)}}});
  EXPECT_EQ(zero, anchor);
  const auto moved = render(id, {{"overrides", {edit(1, 0, 5, 2.0)}}});
  EXPECT_NE(moved, anchor);
  EXPECT_EQ(render(id, json::object()), anchor);

  auto get = client_->Get("/v1/sessions/" + id + "/render");
  EXPECT_EQ(decode_tensor(get->body), anchor);
}

TEST_F(ServiceTest, EditStackEndpoints) {
  const auto id = create(7);
  const auto anchor = render(id, json::object());
  auto res = client_->Post("/v1/sessions/" + id + "/edits", edit(2, 1, 3, 1.5).dump(),
                           "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(json::parse(res->body).size(), 1u);
  EXPECT_EQ(json::parse(client_->Get("/v1/sessions/" + id + "/edits")->body).size(), 1u);
  const auto edited = render(id, json::object());
  EXPECT_NE(edited, anchor);
  res = client_->Delete("/v1/sessions/" + id + "/edits");
  EXPECT_EQ(json::parse(res->body).size(), 0u);
  EXPECT_EQ(render(id, json::object()), anchor);

  const auto committed = render(id, {{"overrides", {edit(2, 1, 3, 1.5)}}, {"commit", true}});
  EXPECT_EQ(committed, edited);
  EXPECT_EQ(json::parse(client_->Get("/v1/sessions/" + id + "/edits")->body).size(), 1u);
}

TEST_F(ServiceTest, SnapshotRestoreReplaysBitExactly) {
  const auto id = create(8);
  client_->Post("/v1/sessions/" + id + "/edits", edit(0, 0, 2, 1.0).dump(), "application/json");
  client_->Post("/v1/sessions/" + id + "/edits", edit(5, 3, 5, -1.0).dump(), "application/json");
  const auto snap = json::parse(client_->Get("/v1/sessions/" + id)->body);
  auto res = client_->Post("/v1/sessions", json{{"snapshot", snap}}.dump(), "application/json");
  ASSERT_EQ(res->status, 201) << res->body;
  const auto copy = json::parse(res->body).at("id").get<std::string>();
  EXPECT_NE(copy, id);
  EXPECT_EQ(render(copy, json::object()), render(id, json::object()));
}

TEST_F(ServiceTest, CaptureEndpointShowsCausality) {
  const auto id = create(9);
  for (std::size_t i = 0; i < 3; ++i) {
    json capture = {{"layer", i}, {"tap", "pre"}};
    const auto a = render(id, {{"overrides", {edit(0, 3, 5, 2.0)}}, {"capture", capture}});
    const auto b = render(id, {{"overrides", {edit(4, 3, 5, -1.0)}}, {"capture", capture}});
    EXPECT_EQ(a, b);
  }
}

TEST_F(ServiceTest, PngByQueryOrAccept) {
  const auto id = create(10);
  auto q = client_->Get("/v1/sessions/" + id + "/render?format=png");
  ASSERT_EQ(q->status, 200);
  EXPECT_EQ(q->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(q->body.substr(0, 8), std::string("\x89PNG\r\n\x1a\n", 8));
  auto a = client_->Post("/v1/sessions/" + id + "/render", httplib::Headers{{"Accept", "image/png"}},
                         "{}", "application/json");
  EXPECT_EQ(a->get_header_value("Content-Type"), "image/png");
  EXPECT_EQ(a->body, q->body);
}

TEST_F(ServiceTest, ErrorsMapToStatusCodes) {
  const auto id = create(11);
  auto bad = client_->Post("/v1/sessions/" + id + "/render",
                           json{{"overrides", {{{"component", 0}}}}}.dump(), "application/json");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(json::parse(bad->body).at("pointer"), "/overrides/0/layer_end");
  EXPECT_EQ(client_->Post("/v1/sessions/" + id + "/edits", edit(8, 0, 1, 1.0).dump(),
                          "application/json")->status,
            400);
  EXPECT_EQ(client_->Post("/v1/sessions/" + id + "/edits", edit(0, 0, 6, 1.0).dump(),
                          "application/json")->status,
            400);
  EXPECT_EQ(client_->Post("/v1/sessions/" + id + "/render", "{not json", "application/json")->status,
            400);
  EXPECT_EQ(client_->Post("/v1/sessions/zzz/render", "{}", "application/json")->status, 404);
}

TEST_F(ServiceTest, ComponentsMetadata) {
  auto res = client_->Get("/v1/components");
  ASSERT_EQ(res->status, 200);
  const auto j = json::parse(res->body);
  EXPECT_EQ(j.at("K"), 8);
  EXPECT_EQ(j.at("dim"), 16);
  EXPECT_EQ(j.at("layer_count"), 6);
  EXPECT_EQ(j.at("names").size(), 8u);
  EXPECT_EQ(j.at("variances").size(), 8u);
  EXPECT_EQ(j.at("kind"), "basis");
}

TEST_F(ServiceTest, EditSetsPutGetList) {
  const json set = {{"model", "toy"},
                    {"basis", "basis.gspc"},
                    {"edits",
                     {{{"name", "E(v1,0-2)"},
                       {"component", 1},
                       {"layer_start", 0},
                       {"layer_end", 2},
                       {"space", "style"},
                       {"sigma_default", 0.0},
                       {"sigma_range", {-2.0, 2.0}}}}}};
  auto put = client_->Put("/v1/editsets/faces", set.dump(), "application/json");
  ASSERT_EQ(put->status, 200) << put->body;
  EXPECT_EQ(json::parse(client_->Get("/v1/editsets")->body), json::array({"faces"}));
  auto get = client_->Get("/v1/editsets/faces");
  ASSERT_EQ(get->status, 200) << get->body;
  EXPECT_EQ(json::parse(get->body), set);
  EXPECT_EQ(client_->Get("/v1/editsets/missing")->status, 404);
  EXPECT_EQ(client_->Put("/v1/editsets/basis", set.dump(), "application/json")->status, 409);

  auto bad = set;
  bad["edits"][0]["layer_end"] = 6;
  auto r = client_->Put("/v1/editsets/bad", bad.dump(), "application/json");
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("pointer"), "/edits/0/layer_end");
  bad = set;
  bad["edits"][0]["component"] = 8;
  EXPECT_EQ(client_->Put("/v1/editsets/bad", bad.dump(), "application/json")->status, 400);
  EXPECT_EQ(client_->Put("/v1/editsets/..hidden", set.dump(), "application/json")->status, 400);
}

}  // namespace
}  // namespace layerpca
