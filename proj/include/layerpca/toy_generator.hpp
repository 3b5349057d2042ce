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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "layerpca/edit.hpp"
#include "layerpca/tensor.hpp"

namespace layerpca {

// Shape and seed of a layered generator. Feature tensors are [C, H, W];
// the image is [H, W, 3] with values in [-1, 1] (unclamped in linear mode).
struct GeneratorDescriptor {
  LatentSpace family = LatentSpace::style;
  std::uint32_t latent_dim = 16;
  std::uint32_t style_dim = 16;
  std::vector<std::array<std::uint32_t, 3>> layer_dims;
  std::array<std::uint32_t, 3> image_dims{32, 32, 3};
  std::optional<std::string> conditioning;
  std::uint64_t seed = 0;
  bool linear_mode = false;

  // d_z = d_w = 16, six layers at 4,4,8,8,16,16 with 8 channels, 32x32x3.
  static GeneratorDescriptor toy(LatentSpace family, std::uint64_t seed, bool linear_mode = false);

  std::size_t layer_count() const noexcept { return layer_dims.size(); }
  // Dimension of the vectors carried by a LayeredLatentState.
  std::uint32_t state_dim() const noexcept {
    return family == LatentSpace::style ? style_dim : latent_dim;
  }
  std::size_t feature_size(std::size_t layer) const;
  std::size_t image_size() const noexcept {
    return std::size_t{image_dims[0]} * image_dims[1] * image_dims[2];
  }

  void validate() const;
  friend bool operator==(const GeneratorDescriptor&, const GeneratorDescriptor&) = default;
};

nlohmann::json descriptor_to_json(const GeneratorDescriptor& d);
GeneratorDescriptor descriptor_from_json(const nlohmann::json& j);

// Per-layer activations before and after the nonlinearity, plus the image.
struct FeatureCapture {
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> post;
  Eigen::VectorXd image;
};

enum class Tap { pre, post };

// Deterministic random-weight generator. Style family:
//   y_0 = act((1 + S_0 w_0) * c + T_0 w_0 + b_0)
//   y_i = act((1 + S_i w_i) * conv_i(up(y_{i-1})) + T_i w_i + b_i)
// Skip family:
//   y_0 = act(A_0 z + B_0 z_0 + b_0)
//   y_i = act(conv_i(up(y_{i-1})) + B_i z_i + b_i)
// S, T and B act per channel. act is tanh, or identity in linear mode, where
// the multiplicative S term is also dropped so the generator is affine.
class ToyGenerator {
 public:
  explicit ToyGenerator(GeneratorDescriptor descriptor);

  const GeneratorDescriptor& descriptor() const noexcept { return desc_; }

  // w = M(z): affine -> tanh -> affine -> tanh -> affine.
  Eigen::VectorXd map_latent(const Eigen::Ref<const Eigen::VectorXd>& z) const;
  Eigen::MatrixXd map_latents(const Eigen::Ref<const Eigen::MatrixXd>& zs) const;

  // Unedited state for latent z (w = M(z) for the style family).
  LayeredLatentState initial_state(const Eigen::Ref<const Eigen::VectorXd>& z) const;

  // Runs layers 0..last_layer; the image is produced only when every layer
  // runs.
  FeatureCapture synthesize(const LayeredLatentState& state,
                            std::optional<std::size_t> last_layer = std::nullopt) const;

  // Row j holds the flattened layer tensor for latent row j.
  Eigen::MatrixXd features(const Eigen::Ref<const Eigen::MatrixXd>& zs, std::size_t layer,
                           Tap tap) const;

  // Rows index0 .. index0+count-1 of the standard-normal latent stream.
  Eigen::MatrixXd sample_latents(std::size_t count, std::uint64_t seed,
                                 std::uint64_t index0 = 0) const;

  TensorBlock image_tensor(const FeatureCapture& c) const;
  TensorBlock feature_tensor(const FeatureCapture& c, std::size_t layer, Tap tap = Tap::post) const;

 private:
  struct Layer {
    Eigen::MatrixXd conv;    // C_out x (C_in * 9); unused at layer 0
    Eigen::VectorXd bias;    // C_out
    Eigen::MatrixXd scale;   // C_out x d_w (style)
    Eigen::MatrixXd shift;   // C_out x d (style: d_w, skip: d_z)
  };

  void check_state(const LayeredLatentState& s) const;
  Eigen::VectorXd activate(const Eigen::VectorXd& pre) const;
  Eigen::VectorXd upsample_conv(const Eigen::VectorXd& in, std::size_t layer) const;

  GeneratorDescriptor desc_;
  std::array<Eigen::MatrixXd, 3> map_w_;
  std::array<Eigen::VectorXd, 3> map_b_;
  Eigen::VectorXd const_input_;  // style: [C0, H0, W0]
  Eigen::MatrixXd latent_in_;    // skip: (C0*H0*W0) x d_z
  std::vector<Layer> layers_;
  Eigen::MatrixXd to_rgb_;       // 3 x C_last
  Eigen::VectorXd rgb_bias_;
};

// Matches ToyGenerator::sample_latents without constructing weights.
Eigen::MatrixXd sample_latents(std::uint32_t dim, std::size_t count, std::uint64_t seed,
                               std::uint64_t index0 = 0);

}  // namespace layerpca
