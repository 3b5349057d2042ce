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

#include <cmath>

#include "layerpca/errors.hpp"
#include "layerpca/toy_generator.hpp"
#include "test_util.hpp"

namespace layerpca {
namespace {

using testing::gaussian;
using testing::max_abs;

LayeredLatentState perturbed_state(const ToyGenerator& g, std::uint64_t seed) {
  const Eigen::VectorXd z = g.sample_latents(1, seed).row(0).transpose();
  auto s = g.initial_state(z);
  const auto d = g.descriptor().state_dim();
  for (std::size_t i = 0; i < s.layer_count(); ++i) {
    s.per_layer[i] += 0.3 * gaussian(d, 1, seed * 31 + i, 7);
  }
  return s;
}

LayeredLatentState blend(const LayeredLatentState& a, const LayeredLatentState& b, double t) {
  auto out = a;
  out.base = t * a.base + (1.0 - t) * b.base;
  for (std::size_t i = 0; i < a.layer_count(); ++i) {
    out.per_layer[i] = t * a.per_layer[i] + (1.0 - t) * b.per_layer[i];
  }
  return out;
}

class FamilyTest : public ::testing::TestWithParam<LatentSpace> {};

TEST_P(FamilyTest, SameSeedSameWeights) {
  const ToyGenerator a(GeneratorDescriptor::toy(GetParam(), 11));
  const ToyGenerator b(GeneratorDescriptor::toy(GetParam(), 11));
  const auto s = perturbed_state(a, 3);
  const auto ca = a.synthesize(s), cb = b.synthesize(s);
  EXPECT_EQ(ca.image, cb.image);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(ca.post[i], cb.post[i]);

  const ToyGenerator c(GeneratorDescriptor::toy(GetParam(), 12));
  EXPECT_NE(c.synthesize(s).image, ca.image);
}

TEST_P(FamilyTest, CaptureShapes) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 1));
  const auto c = g.synthesize(perturbed_state(g, 1));
  ASSERT_EQ(c.post.size(), 6u);
  ASSERT_EQ(c.pre.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(std::size_t(c.post[i].size()), g.descriptor().feature_size(i));
  }
  EXPECT_EQ(c.image.size(), 32 * 32 * 3);
  EXPECT_LE(c.image.cwiseAbs().maxCoeff(), 1.0);
  const auto img = g.image_tensor(c);
  EXPECT_EQ(img.dims, (std::vector<std::uint32_t>{32, 32, 3}));
  EXPECT_EQ(g.feature_tensor(c, 2).dims, (std::vector<std::uint32_t>{8, 8, 8}));
}

TEST_P(FamilyTest, PartialSynthesisStopsEarly) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 2));
  const auto s = perturbed_state(g, 2);
  const auto full = g.synthesize(s);
  const auto part = g.synthesize(s, 2);
  ASSERT_EQ(part.post.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(part.post[i], full.post[i]);
  EXPECT_EQ(part.image.size(), 0);
}

// Changing only layer j's input leaves every earlier tensor bit-identical and
// changes layer j itself.
TEST_P(FamilyTest, CausalityOverRandomPairs) {
  for (bool linear : {false, true}) {
    const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 5, linear));
    for (std::uint64_t t = 0; t < 100; ++t) {
      const auto s = perturbed_state(g, 100 + t);
      const std::size_t j = t % 6;
      auto s2 = s;
      s2.per_layer[j] += gaussian(g.descriptor().state_dim(), 1, 500 + t, 8);
      const auto a = g.synthesize(s), b = g.synthesize(s2);
      for (std::size_t i = 0; i < j; ++i) {
        ASSERT_EQ(a.pre[i], b.pre[i]) << "layer " << i << " pair " << t;
        ASSERT_EQ(a.post[i], b.post[i]) << "layer " << i << " pair " << t;
      }
      for (std::size_t i = j; i < 6; ++i) ASSERT_NE(a.post[i], b.post[i]);
      ASSERT_NE(a.image, b.image);
    }
  }
}

TEST_P(FamilyTest, LinearModeIsAffineInState) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 6, true));
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto s1 = perturbed_state(g, 10 + t), s2 = perturbed_state(g, 40 + t);
    const double a = 0.1 * double(t) - 0.3;
    const auto mixed = g.synthesize(blend(s1, s2, a));
    const auto c1 = g.synthesize(s1), c2 = g.synthesize(s2);
    EXPECT_LT(max_abs(mixed.image - (a * c1.image + (1 - a) * c2.image)), 1e-5);
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_LT(max_abs(mixed.post[i] - (a * c1.post[i] + (1 - a) * c2.post[i])), 1e-5);
    }
  }
}

// In linear mode the response to a unit perturbation of one input coordinate
// is a Jacobian column; a central difference at any other point must match.
TEST_P(FamilyTest, FiniteDifferenceJacobian) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 7, true));
  const auto s0 = perturbed_state(g, 70);
  const auto s1 = perturbed_state(g, 71);
  const Eigen::VectorXd img0 = g.synthesize(s0).image;
  const std::uint32_t d = g.descriptor().state_dim();
  const double h = 1e-3;
  for (std::size_t layer = 0; layer < 6; ++layer) {
    for (Eigen::Index c = 0; c < Eigen::Index(d); c += 5) {
      auto unit = s0;
      unit.per_layer[layer][c] += 1.0;
      const Eigen::VectorXd column = g.synthesize(unit).image - img0;
      auto plus = s1, minus = s1;
      plus.per_layer[layer][c] += h;
      minus.per_layer[layer][c] -= h;
      const Eigen::VectorXd fd = (g.synthesize(plus).image - g.synthesize(minus).image) / (2 * h);
      EXPECT_LT(max_abs(fd - column), 1e-4) << "layer " << layer << " coord " << c;
    }
  }
}

TEST_P(FamilyTest, StateMismatchRejected) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 8));
  auto s = perturbed_state(g, 8);
  auto short_state = s;
  short_state.per_layer.pop_back();
  EXPECT_THROW(g.synthesize(short_state), DimensionError);
  auto wrong_space = s;
  wrong_space.space = GetParam() == LatentSpace::style ? LatentSpace::skip : LatentSpace::style;
  EXPECT_THROW(g.synthesize(wrong_space), DimensionError);
  auto wrong_dim = s;
  wrong_dim.per_layer[3] = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(g.synthesize(wrong_dim), DimensionError);
  EXPECT_THROW(g.synthesize(s, 6), RangeError);
}

TEST_P(FamilyTest, FeaturesMatchSynthesis) {
  const ToyGenerator g(GeneratorDescriptor::toy(GetParam(), 9));
  const auto zs = g.sample_latents(4, 2);
  const auto f = g.features(zs, 3, Tap::pre);
  for (Eigen::Index r = 0; r < 4; ++r) {
    const auto c = g.synthesize(g.initial_state(zs.row(r).transpose()));
    EXPECT_EQ(Eigen::VectorXd(f.row(r).transpose()), c.pre[3]);
  }
}

TEST_P(FamilyTest, DescriptorJsonRoundTrip) {
  auto d = GeneratorDescriptor::toy(GetParam(), 123, true);
  d.conditioning = "class-207";
  EXPECT_EQ(descriptor_from_json(descriptor_to_json(d)), d);
}

INSTANTIATE_TEST_SUITE_P(Families, FamilyTest,
                         ::testing::Values(LatentSpace::style, LatentSpace::skip),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(MappingTest, DeterministicAndOrigin) {
  const ToyGenerator g(GeneratorDescriptor::toy(LatentSpace::style, 4));
  const Eigen::VectorXd z = gaussian(16, 1, 1);
  EXPECT_EQ(g.map_latent(z), g.map_latent(z));
  const ToyGenerator g2(GeneratorDescriptor::toy(LatentSpace::style, 4));
  EXPECT_EQ(g.map_latent(Eigen::VectorXd::Zero(16)), g2.map_latent(Eigen::VectorXd::Zero(16)));
  EXPECT_TRUE(g.map_latent(Eigen::VectorXd::Zero(16)).allFinite());
}

TEST(MappingTest, LinearModeIsAffine) {
  const ToyGenerator g(GeneratorDescriptor::toy(LatentSpace::style, 4, true));
  for (std::uint64_t t = 0; t < 20; ++t) {
    const Eigen::VectorXd z1 = gaussian(16, 1, 2 * t), z2 = gaussian(16, 1, 2 * t + 1);
    const double a = 0.37 + 0.05 * double(t);
    EXPECT_LT(max_abs(g.map_latent(a * z1 + (1 - a) * z2) -
                      (a * g.map_latent(z1) + (1 - a) * g.map_latent(z2))),
              1e-5);
  }
}

TEST(MappingTest, NonlinearByDefault) {
  const ToyGenerator g(GeneratorDescriptor::toy(LatentSpace::style, 4));
  const Eigen::VectorXd z1 = gaussian(16, 1, 1), z2 = gaussian(16, 1, 2);
  EXPECT_GT(max_abs(g.map_latent(0.5 * z1 + 0.5 * z2) -
                    (0.5 * g.map_latent(z1) + 0.5 * g.map_latent(z2))),
            1e-3);
}

TEST(MappingTest, SkipFamilyRejected) {
  const ToyGenerator g(GeneratorDescriptor::toy(LatentSpace::skip, 4));
  EXPECT_THROW(g.map_latent(Eigen::VectorXd::Zero(16)), DimensionError);
}

TEST(SamplingTest, MeanNearZero) {
  const auto zs = sample_latents(16, 100000, 42);
  EXPECT_LT(zs.colwise().mean().cwiseAbs().maxCoeff(), 0.02);
  const Eigen::RowVectorXd var =
      (zs.rowwise() - zs.colwise().mean()).array().square().colwise().sum() / double(zs.rows() - 1);
  EXPECT_LT((var.array() - 1.0).abs().maxCoeff(), 0.03);
}

TEST(SamplingTest, PartitionIndependent) {
  const auto all = sample_latents(16, 100, 5);
  Eigen::MatrixXd pieces(100, 16);
  pieces.topRows(37) = sample_latents(16, 37, 5, 0);
  pieces.middleRows(37, 50) = sample_latents(16, 50, 5, 37);
  pieces.bottomRows(13) = sample_latents(16, 13, 5, 87);
  EXPECT_EQ(all, pieces);
  const ToyGenerator g(GeneratorDescriptor::toy(LatentSpace::skip, 0));
  EXPECT_EQ(g.sample_latents(100, 5), all);
}

TEST(SamplingTest, SeedsDiffer) {
  EXPECT_NE(sample_latents(16, 1, 1), sample_latents(16, 1, 2));
}

TEST(DescriptorTest, ValidationAndSchema) {
  auto d = GeneratorDescriptor::toy(LatentSpace::style, 0);
  EXPECT_NO_THROW(d.validate());
  auto one = d;
  one.layer_dims.resize(1);
  EXPECT_THROW(one.validate(), DimensionError);
  auto zero = d;
  zero.layer_dims[2][0] = 0;
  EXPECT_THROW(zero.validate(), DimensionError);

  auto j = descriptor_to_json(d);
  j.erase("d_w");
  try {
    descriptor_from_json(j);
    FAIL() << "missing d_w accepted";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.pointer(), "/d_w");
  }
}

}  // namespace
}  // namespace layerpca
