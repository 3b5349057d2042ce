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
#include <fstream>

#include "layerpca/direction.hpp"
#include "layerpca/edit_set.hpp"
#include "layerpca/errors.hpp"
#include "layerpca/pca.hpp"
#include "test_util.hpp"

namespace layerpca {
namespace {

namespace fs = std::filesystem;

EditSet sample_set() {
  EditSet s;
  s.model = "toy-style-7";
  s.basis = "basis.gspc";
  s.edits = {
      {"E(v1,0-2)", 1, LayerRange::span(0, 2), LatentSpace::style, 0.0, {-2.0, 2.0}},
      {"global pc0", 0, LayerRange::every(), LatentSpace::style, 1.5, {-3.0, 3.0}},
      {"late", 4, LayerRange::span(3, 5), LatentSpace::style, -0.25, {-1.0, 0.5}},
  };
  return s;
}

std::string pointer_of(const nlohmann::json& doc, std::optional<std::size_t> layers = {}) {
  try {
    edit_set_from_json(doc, layers);
  } catch (const SchemaError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

class EditSetFileTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("layerpca_editset_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST(EditSetJsonTest, RoundTripIsStructurallyEqual) {
  const auto s = sample_set();
  const auto j = edit_set_to_json(s);
  EXPECT_EQ(edit_set_from_json(j), s);
  EXPECT_EQ(edit_set_to_json(edit_set_from_json(j)), j);
  EXPECT_EQ(j["edits"][1]["layer_start"], 0);
  EXPECT_EQ(j["edits"][1]["layer_end"], "all");
}

TEST(EditSetJsonTest, SigmaRangeDefaults) {
  auto j = edit_set_to_json(sample_set());
  j["edits"][0].erase("sigma_range");
  const auto s = edit_set_from_json(j);
  EXPECT_EQ(s.edits[0].sigma_range, kDefaultSigmaRange);
}

TEST(EditSetJsonTest, SchemaErrorsCarryPointers) {
  const auto good = edit_set_to_json(sample_set());

  auto j = good;
  j["edits"][1]["colour"] = "red";
  EXPECT_EQ(pointer_of(j), "/edits/1/colour");

  j = good;
  j["edits"][0].erase("component");
  EXPECT_EQ(pointer_of(j), "/edits/0/component");

  j = good;
  j["edits"][2]["component"] = "four";
  EXPECT_EQ(pointer_of(j), "/edits/2/component");

  j = good;
  j["edits"][2]["component"] = -1;
  EXPECT_EQ(pointer_of(j), "/edits/2/component");

  j = good;
  j["edits"][0]["layer_start"] = 3;
  j["edits"][0]["layer_end"] = 1;
  EXPECT_EQ(pointer_of(j), "/edits/0/layer_end");

  j = good;
  EXPECT_EQ(pointer_of(j, 5), "/edits/2/layer_end");  // layer_end 5 with 5 layers
  EXPECT_EQ(pointer_of(j, 6), "<accepted>");

  j = good;
  j["edits"][0]["space"] = "pixel";
  EXPECT_EQ(pointer_of(j), "/edits/0/space");

  j = good;
  j["edits"][0]["sigma_range"] = {2.0, -2.0};
  EXPECT_EQ(pointer_of(j), "/edits/0/sigma_range");

  j = good;
  j["edits"][0]["sigma_default"] = "big";
  EXPECT_EQ(pointer_of(j), "/edits/0/sigma_default");

  j = good;
  j["edits"][1]["layer_start"] = 2;
  EXPECT_EQ(pointer_of(j), "/edits/1/layer_start");

  j = good;
  j.erase("basis");
  EXPECT_EQ(pointer_of(j), "/basis");

  j = good;
  j["version"] = 2;
  EXPECT_EQ(pointer_of(j), "/version");

  EXPECT_EQ(pointer_of(nlohmann::json::array()), "/");
}

TEST(EditSpecJsonTest, RoundTripAndErrors) {
  const EditSpec s{"x", 3, LayerRange::span(1, 4), LatentSpace::skip, -0.75};
  const auto back = edit_spec_from_json(edit_spec_to_json(s));
  EXPECT_EQ(back.name, s.name);
  EXPECT_EQ(back.component, s.component);
  EXPECT_EQ(back.layers, s.layers);
  EXPECT_EQ(back.space, s.space);
  EXPECT_EQ(back.sigma, s.sigma);

  auto j = edit_spec_to_json(s);
  j["sigma"] = nullptr;
  try {
    edit_spec_from_json(j, "/overrides/0");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.pointer(), "/overrides/0/sigma");
  }
}

TEST_F(EditSetFileTest, FileRoundTripAndDimensionCheck) {
  PrincipalBasis b;
  b.mean = Eigen::VectorXd::Zero(16);
  b.basis = Eigen::MatrixXd::Identity(16, 8);
  b.variances = Eigen::VectorXd::Ones(8);
  save_basis(b, dir_ / "basis.gspc", {});
  const auto s = sample_set();
  save_edit_set(s, dir_ / "set.json");
  EXPECT_EQ(load_edit_set(dir_ / "set.json", {16, 6, true}), s);
  EXPECT_THROW(load_edit_set(dir_ / "set.json", {12, 6, true}), DimensionError);

  // Re-export of an import is byte-identical.
  save_edit_set(load_edit_set(dir_ / "set.json"), dir_ / "again.json");
  std::ifstream a(dir_ / "set.json"), c(dir_ / "again.json");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}),
            std::string(std::istreambuf_iterator<char>(c), {}));
}

TEST_F(EditSetFileTest, ComponentBeyondBasisRejected) {
  PrincipalDirections d;
  d.directions = Eigen::MatrixXd::Identity(16, 3);
  save_directions(d, dir_ / "basis.gspc");
  EXPECT_THROW(load_edit_set((save_edit_set(sample_set(), dir_ / "s.json"), dir_ / "s.json")),
               DimensionError);
}

TEST_F(EditSetFileTest, MissingBasisAndBadJson) {
  save_edit_set(sample_set(), dir_ / "s.json");
  EXPECT_NO_THROW(load_edit_set(dir_ / "s.json"));
  EXPECT_THROW(load_edit_set(dir_ / "s.json", {std::nullopt, std::nullopt, true}), IoError);
  std::ofstream(dir_ / "bad.json") << "{\"model\": ";
  EXPECT_THROW(load_edit_set(dir_ / "bad.json"), SchemaError);
  EXPECT_THROW(load_edit_set(dir_ / "nope.json"), IoError);
}

}  // namespace
}  // namespace layerpca
