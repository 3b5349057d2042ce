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

#include "layerpca/toy_generator.hpp"

#include <cmath>

#include "layerpca/errors.hpp"
#include "layerpca/rng.hpp"

namespace layerpca {

namespace {

constexpr std::uint32_t kLatentStream = 0x4c415400u;  // "LAT\0"
constexpr std::uint32_t kWeightStreamBase = 0x57000000u;

// Weight tensors draw from consecutive streams in construction order.
class WeightSource {
 public:
  explicit WeightSource(std::uint64_t seed) : seed_(seed) {}

  Eigen::MatrixXd normal(Eigen::Index rows, Eigen::Index cols, double stddev) {
    const CounterRng rng(seed_, kWeightStreamBase + next_++);
    Eigen::MatrixXd m(rows, cols);
    std::uint64_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal(i++);
    return m;
  }
  Eigen::VectorXd normal(Eigen::Index n, double stddev) { return normal(n, 1, stddev); }

 private:
  std::uint64_t seed_;
  std::uint32_t next_ = 0;
};

}  // namespace

GeneratorDescriptor GeneratorDescriptor::toy(LatentSpace family, std::uint64_t seed,
                                             bool linear_mode) {
  GeneratorDescriptor d;
  d.family = family;
  d.seed = seed;
  d.linear_mode = linear_mode;
  d.layer_dims = {{8, 4, 4}, {8, 4, 4}, {8, 8, 8}, {8, 8, 8}, {8, 16, 16}, {8, 16, 16}};
  return d;
}

std::size_t GeneratorDescriptor::feature_size(std::size_t layer) const {
  if (layer >= layer_dims.size()) {
    throw RangeError("layer " + std::to_string(layer) + " out of range");
  }
  const auto& d = layer_dims[layer];
  return std::size_t{d[0]} * d[1] * d[2];
}

void GeneratorDescriptor::validate() const {
  if (layer_dims.size() < 2) throw DimensionError("generator needs at least 2 layers");
  if (latent_dim == 0) throw DimensionError("latent_dim must be positive");
  if (family == LatentSpace::style && style_dim == 0) {
    throw DimensionError("style_dim must be positive");
  }
  for (std::size_t i = 0; i < layer_dims.size(); ++i) {
    const auto& d = layer_dims[i];
    if (d[0] == 0 || d[1] == 0 || d[2] == 0) {
      throw DimensionError("layer " + std::to_string(i) + " has a zero extent");
    }
    if (i > 0) {
      const auto& p = layer_dims[i - 1];
      const bool ok_h = d[1] == p[1] || d[1] == 2 * p[1];
      const bool ok_w = d[2] == p[2] || d[2] == 2 * p[2];
      if (!ok_h || !ok_w || (d[1] == 2 * p[1]) != (d[2] == 2 * p[2])) {
        throw DimensionError("layer " + std::to_string(i) +
                             " must keep or double the previous spatial size");
      }
    }
  }
  const auto& last = layer_dims.back();
  if (image_dims[2] != 3 || image_dims[0] == 0 || image_dims[0] % last[1] != 0 ||
      image_dims[1] % last[2] != 0 || image_dims[0] / last[1] != image_dims[1] / last[2]) {
    throw DimensionError("image dims must be an integer upscale of the last layer, 3 channels");
  }
}

nlohmann::json descriptor_to_json(const GeneratorDescriptor& d) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& l : d.layer_dims) dims.push_back({l[0], l[1], l[2]});
  nlohmann::json j = {{"family", std::string(to_string(d.family))},
                      {"d_z", d.latent_dim},
                      {"L", d.layer_count()},
                      {"layer_feature_dims", std::move(dims)},
                      {"image_dims", {d.image_dims[0], d.image_dims[1], d.image_dims[2]}},
                      {"tap_points", {"pre", "post"}},
                      {"seed", d.seed},
                      {"linear_mode", d.linear_mode}};
  if (d.family == LatentSpace::style) j["d_w"] = d.style_dim;
  if (d.conditioning) j["conditioning"] = *d.conditioning;
  return j;
}

GeneratorDescriptor descriptor_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& ptr, const std::string& what) -> GeneratorDescriptor {
    throw SchemaError(ptr, what);
  };
  if (!j.is_object()) return fail("/", "descriptor must be an object");
  for (const char* key : {"family", "d_z", "L", "layer_feature_dims", "image_dims"}) {
    if (!j.contains(key)) return fail(std::string("/") + key, "missing required key");
  }
  GeneratorDescriptor d;
  try {
    d.family = latent_space_from_string(j.at("family").get<std::string>());
    d.latent_dim = j.at("d_z").get<std::uint32_t>();
    if (d.family == LatentSpace::style) {
      if (!j.contains("d_w")) return fail("/d_w", "style family requires d_w");
      d.style_dim = j.at("d_w").get<std::uint32_t>();
    } else {
      d.style_dim = j.value("d_w", d.latent_dim);
    }
    const auto count = j.at("L").get<std::size_t>();
    for (const auto& l : j.at("layer_feature_dims")) {
      d.layer_dims.push_back({l.at(0).get<std::uint32_t>(), l.at(1).get<std::uint32_t>(),
                              l.at(2).get<std::uint32_t>()});
    }
    if (d.layer_dims.size() != count) return fail("/layer_feature_dims", "length != L");
    const auto& img = j.at("image_dims");
    d.image_dims = {img.at(0).get<std::uint32_t>(), img.at(1).get<std::uint32_t>(),
                    img.at(2).get<std::uint32_t>()};
    d.seed = j.value("seed", std::uint64_t{0});
    d.linear_mode = j.value("linear_mode", false);
    if (j.contains("conditioning")) d.conditioning = j.at("conditioning").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    return fail("/", std::string("malformed descriptor: ") + e.what());
  } catch (const RangeError& e) {
    return fail("/family", e.what());
  }
  return d;
}

ToyGenerator::ToyGenerator(GeneratorDescriptor descriptor) : desc_(std::move(descriptor)) {
  desc_.validate();
  WeightSource ws(desc_.seed);
  const Eigen::Index dz = desc_.latent_dim;
  const Eigen::Index dw = desc_.style_dim;
  const Eigen::Index din = desc_.state_dim();

  if (desc_.family == LatentSpace::style) {
    map_w_[0] = ws.normal(dw, dz, 1.0 / std::sqrt(double(dz)));
    map_b_[0] = ws.normal(dw, 0.1);
    map_w_[1] = ws.normal(dw, dw, 1.5 / std::sqrt(double(dw)));
    map_b_[1] = ws.normal(dw, 0.1);
    map_w_[2] = ws.normal(dw, dw, 1.0 / std::sqrt(double(dw)));
    map_b_[2] = ws.normal(dw, 0.1);
  }

  const auto& d0 = desc_.layer_dims[0];
  const Eigen::Index size0 = Eigen::Index(d0[0]) * d0[1] * d0[2];
  if (desc_.family == LatentSpace::style) {
    const_input_ = ws.normal(size0, 1.0);
  } else {
    latent_in_ = ws.normal(size0, dz, 1.0 / std::sqrt(double(dz)));
  }

  layers_.resize(desc_.layer_count());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Eigen::Index cout = desc_.layer_dims[i][0];
    Layer& l = layers_[i];
    if (i > 0) {
      const Eigen::Index cin = desc_.layer_dims[i - 1][0];
      l.conv = ws.normal(cout, cin * 9, 1.0 / std::sqrt(double(cin * 9)));
    }
    l.bias = ws.normal(cout, 0.1);
    l.shift = ws.normal(cout, din, 1.0 / std::sqrt(double(din)));
    if (desc_.family == LatentSpace::style) {
      l.scale = ws.normal(cout, dw, 0.2 / std::sqrt(double(dw)));
    }
  }
  const Eigen::Index clast = desc_.layer_dims.back()[0];
  to_rgb_ = ws.normal(3, clast, 1.0 / std::sqrt(double(clast)));
  rgb_bias_ = ws.normal(3, 0.1);
}

Eigen::VectorXd ToyGenerator::activate(const Eigen::VectorXd& pre) const {
  if (desc_.linear_mode) return pre;
  return pre.array().tanh();
}

Eigen::VectorXd ToyGenerator::map_latent(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (desc_.family != LatentSpace::style) {
    throw DimensionError("map_latent requires a style-family generator");
  }
  if (z.size() != Eigen::Index(desc_.latent_dim)) throw DimensionError("latent dim mismatch");
  Eigen::VectorXd h = activate(map_w_[0] * z + map_b_[0]);
  h = activate(map_w_[1] * h + map_b_[1]);
  return map_w_[2] * h + map_b_[2];
}

Eigen::MatrixXd ToyGenerator::map_latents(const Eigen::Ref<const Eigen::MatrixXd>& zs) const {
  Eigen::MatrixXd out(zs.rows(), desc_.style_dim);
  for (Eigen::Index r = 0; r < zs.rows(); ++r) {
    out.row(r) = map_latent(zs.row(r).transpose()).transpose();
  }
  return out;
}

LayeredLatentState ToyGenerator::initial_state(const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (desc_.family == LatentSpace::style) {
    return LayeredLatentState::fresh(LatentSpace::style, map_latent(z), desc_.layer_count());
  }
  if (z.size() != Eigen::Index(desc_.latent_dim)) throw DimensionError("latent dim mismatch");
  return LayeredLatentState::fresh(LatentSpace::skip, z, desc_.layer_count());
}

void ToyGenerator::check_state(const LayeredLatentState& s) const {
  if (s.space != desc_.family) throw DimensionError("state space does not match generator family");
  if (s.layer_count() != desc_.layer_count()) {
    throw DimensionError("state has " + std::to_string(s.layer_count()) + " layers, generator " +
                         std::to_string(desc_.layer_count()));
  }
  const Eigen::Index d = desc_.state_dim();
  if (s.base.size() != d) throw DimensionError("state base dim mismatch");
  for (const auto& v : s.per_layer) {
    if (v.size() != d) throw DimensionError("state layer dim mismatch");
  }
}

Eigen::VectorXd ToyGenerator::upsample_conv(const Eigen::VectorXd& in, std::size_t layer) const {
  const auto& pd = desc_.layer_dims[layer - 1];
  const auto& od = desc_.layer_dims[layer];
  const int cin = int(pd[0]), hin = int(pd[1]), win = int(pd[2]);
  const int cout = int(od[0]), hout = int(od[1]), wout = int(od[2]);
  const int f = hout / hin;
  const Eigen::MatrixXd& k = layers_[layer].conv;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index(cout) * hout * wout);
  for (int co = 0; co < cout; ++co) {
    for (int ci = 0; ci < cin; ++ci) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double wgt = k(co, ci * 9 + (dy + 1) * 3 + (dx + 1));
          for (int y = 0; y < hout; ++y) {
            const int yy = y + dy;
            if (yy < 0 || yy >= hout) continue;
            const Eigen::Index src_row = (Eigen::Index(ci) * hin + yy / f) * win;
            const Eigen::Index dst_row = (Eigen::Index(co) * hout + y) * wout;
            for (int x = 0; x < wout; ++x) {
              const int xx = x + dx;
              if (xx < 0 || xx >= wout) continue;
              out[dst_row + x] += wgt * in[src_row + xx / f];
            }
          }
        }
      }
    }
  }
  return out;
}

FeatureCapture ToyGenerator::synthesize(const LayeredLatentState& state,
                                        std::optional<std::size_t> last_layer) const {
  check_state(state);
  if (last_layer && *last_layer >= desc_.layer_count()) {
    throw RangeError("layer " + std::to_string(*last_layer) + " out of range");
  }
  const std::size_t stop = last_layer.value_or(desc_.layer_count() - 1);
  const bool style = desc_.family == LatentSpace::style;
  FeatureCapture cap;
  cap.pre.reserve(stop + 1);
  cap.post.reserve(stop + 1);

  for (std::size_t i = 0; i <= stop; ++i) {
    const Layer& l = layers_[i];
    const auto& d = desc_.layer_dims[i];
    const Eigen::Index plane = Eigen::Index(d[1]) * d[2];
    const Eigen::VectorXd& input = state.per_layer[i];

    Eigen::VectorXd body;
    if (i == 0) {
      body = style ? const_input_ : Eigen::VectorXd(latent_in_ * state.base);
    } else {
      body = upsample_conv(cap.post[i - 1], i);
    }
    const Eigen::VectorXd shift = l.shift * input + l.bias;
    Eigen::VectorXd gain;
    if (style && !desc_.linear_mode) gain = Eigen::VectorXd::Ones(d[0]) + l.scale * input;

    for (Eigen::Index c = 0; c < Eigen::Index(d[0]); ++c) {
      auto seg = body.segment(c * plane, plane);
      if (gain.size() > 0) seg *= gain[c];
      seg.array() += shift[c];
    }
    cap.post.push_back(activate(body));
    cap.pre.push_back(std::move(body));
  }

  if (stop + 1 < desc_.layer_count()) return cap;

  const auto& ld = desc_.layer_dims.back();
  const int hl = int(ld[1]), wl = int(ld[2]), cl = int(ld[0]);
  const int h = int(desc_.image_dims[0]), w = int(desc_.image_dims[1]);
  const int f = h / hl;
  const Eigen::VectorXd& y = cap.post.back();
  Eigen::VectorXd img(Eigen::Index(h) * w * 3);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const Eigen::Index src = Eigen::Index(r / f) * wl + c / f;
      for (int ch = 0; ch < 3; ++ch) {
        double acc = rgb_bias_[ch];
        for (int k = 0; k < cl; ++k) acc += to_rgb_(ch, k) * y[Eigen::Index(k) * hl * wl + src];
        img[(Eigen::Index(r) * w + c) * 3 + ch] = acc;
      }
    }
  }
  cap.image = activate(img);
  return cap;
}

Eigen::MatrixXd ToyGenerator::features(const Eigen::Ref<const Eigen::MatrixXd>& zs,
                                       std::size_t layer, Tap tap) const {
  const auto width = static_cast<Eigen::Index>(desc_.feature_size(layer));
  Eigen::MatrixXd out(zs.rows(), width);
  for (Eigen::Index r = 0; r < zs.rows(); ++r) {
    const auto cap = synthesize(initial_state(zs.row(r).transpose()), layer);
    out.row(r) = (tap == Tap::pre ? cap.pre[layer] : cap.post[layer]).transpose();
  }
  return out;
}

Eigen::MatrixXd ToyGenerator::sample_latents(std::size_t count, std::uint64_t seed,
                                             std::uint64_t index0) const {
  return layerpca::sample_latents(desc_.latent_dim, count, seed, index0);
}

TensorBlock ToyGenerator::image_tensor(const FeatureCapture& c) const {
  TensorBlock t({desc_.image_dims[0], desc_.image_dims[1], desc_.image_dims[2]});
  for (Eigen::Index i = 0; i < c.image.size(); ++i) t.data[i] = static_cast<float>(c.image[i]);
  return t;
}

TensorBlock ToyGenerator::feature_tensor(const FeatureCapture& c, std::size_t layer,
                                         Tap tap) const {
  const auto& d = desc_.layer_dims.at(layer);
  const auto& v = tap == Tap::pre ? c.pre.at(layer) : c.post.at(layer);
  TensorBlock t({d[0], d[1], d[2]});
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  return t;
}

Eigen::MatrixXd sample_latents(std::uint32_t dim, std::size_t count, std::uint64_t seed,
                               std::uint64_t index0) {
  const CounterRng rng(seed, kLatentStream);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), dim);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const std::uint64_t row = index0 + static_cast<std::uint64_t>(r);
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
      out(r, c) = rng.normal(row * dim + static_cast<std::uint64_t>(c));
    }
  }
  return out;
}

}  // namespace layerpca
