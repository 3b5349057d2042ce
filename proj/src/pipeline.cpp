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

#include "layerpca/pipeline.hpp"

#include <fstream>
#include <regex>

#include "json.hpp"

namespace layerpca {

namespace {

struct Checkpoint {
  std::string phase;  // "pca" | "regression"
  std::uint64_t merged = 0;
  IncrementalPca::State state;
  std::optional<PrincipalBasis> basis;
};

nlohmann::json fit_identity(const FitOptions& o, const GeneratorDescriptor& d, Eigen::Index k) {
  return {{"space", o.space.to_string()}, {"seed", o.seed},     {"N", o.samples},
          {"K", k},                       {"batch_size", o.batch_size},
          {"descriptor_hash", descriptor_hash(d)}};
}

std::filesystem::path checkpoint_dir(const FitOptions& o) {
  return o.out_dir.value_or(std::filesystem::temp_directory_path());
}

std::filesystem::path write_checkpoint(const FitOptions& o, const nlohmann::json& identity,
                                       const Checkpoint& c) {
  const auto dir = checkpoint_dir(o);
  std::filesystem::create_directories(dir);
  const auto path = dir / "fit.checkpoint.gspc";
  nlohmann::json meta = identity;
  meta["phase"] = c.phase;
  meta["merged"] = c.merged;
  if (c.phase == "pca") {
    save_tensors({to_tensor(c.state.sum), to_tensor(c.state.basis), to_tensor(c.state.singular)},
                 path);
  } else {
    save_basis(*c.basis, dir / "fit.checkpoint.basis.gspc");
    save_tensors({}, path);
  }
  std::ofstream(dir / "fit.checkpoint.json") << meta.dump(2) << '\n';
  return path;
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const nlohmann::json& identity) {
  auto side = path;
  side.replace_extension(".json");
  std::ifstream in(side);
  if (!in) throw IoError("missing checkpoint metadata " + side.string());
  const auto meta = nlohmann::json::parse(in);
  for (const auto& [key, value] : identity.items()) {
    if (meta.value(key, nlohmann::json()) != value) {
      throw RangeError("checkpoint was written for a different fit (" + key + " differs)");
    }
  }
  Checkpoint c;
  c.phase = meta.at("phase").get<std::string>();
  c.merged = meta.at("merged").get<std::uint64_t>();
  if (c.phase == "pca") {
    const auto ts = load_tensors(path);
    if (ts.size() != 3) throw FormatError("archive", "PCA checkpoint must hold 3 tensors");
    // Checkpoints round through float32 like every persisted artifact.
    c.state.sum = to_vector(ts[0]);
    c.state.basis = to_matrix(ts[1]);
    c.state.singular = to_vector(ts[2]);
    c.state.merged = c.merged;
  } else {
    c.basis = load_basis(path.parent_path() / "fit.checkpoint.basis.gspc");
  }
  return c;
}

}  // namespace

FitSpace FitSpace::parse(const std::string& s) {
  if (s == "style-w" || s == "style") return {};
  static const std::regex re(R"(feature@(\d+)(:(pre|post))?)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) {
    throw RangeError("unknown fit space '" + s + "' (expected style-w or feature@<layer>[:pre|post])");
  }
  FitSpace f;
  f.style_w = false;
  f.layer = std::stoul(m[1].str());
  f.tap = m[3].str() == "pre" ? Tap::pre : Tap::post;
  return f;
}

std::string FitSpace::to_string() const {
  if (style_w) return "style-w";
  return "feature@" + std::to_string(layer) + (tap == Tap::pre ? ":pre" : ":post");
}

FitResult pipeline_fit(GeneratorBridge& bridge, const FitOptions& o) {
  const GeneratorDescriptor desc = bridge.descriptor();
  Eigen::Index dim = 0;
  if (o.space.style_w) {
    if (desc.family != LatentSpace::style) {
      throw RangeError("style-w fitting needs a style-family generator");
    }
    dim = desc.style_dim;
  } else {
    if (o.space.layer >= desc.layer_count()) {
      throw RangeError("bridge has no layer " + std::to_string(o.space.layer));
    }
    dim = static_cast<Eigen::Index>(desc.feature_size(o.space.layer));
  }
  const Eigen::Index k =
      o.components > 0 ? o.components
                       : (o.space.style_w ? dim
                                          : std::min<Eigen::Index>(kDefaultFeatureComponents, dim));
  const auto identity = fit_identity(o, desc, k);

  auto fetch = [&](std::size_t count, std::uint64_t offset) -> std::pair<Eigen::MatrixXd, Eigen::MatrixXd> {
    Eigen::MatrixXd z = bridge.sample(count, o.seed, offset);
    Eigen::MatrixXd data = o.space.style_w ? bridge.map(z)
                                           : bridge.features(z, o.space.layer, o.space.tap);
    return {std::move(z), std::move(data)};
  };

  std::optional<Checkpoint> resume;
  if (o.resume_from) resume = read_checkpoint(*o.resume_from, identity);

  FitResult result;
  if (resume && resume->phase == "regression") {
    result.basis = *resume->basis;
  } else {
    IncrementalPca pca = resume ? IncrementalPca::restore(resume->state, k, o.batch_size)
                                : IncrementalPca(dim, k, o.batch_size);
    std::uint64_t done = resume ? resume->merged : 0;
    while (done < o.samples) {
      const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(o.batch_size, o.samples - done));
      Eigen::MatrixXd data;
      try {
        data = fetch(m, done).second;
      } catch (const std::exception& e) {
        Checkpoint c{"pca", done, pca.checkpoint(), std::nullopt};
        const auto path = write_checkpoint(o, identity, c);
        throw PartialFitError(std::string("bridge failed during PCA sampling: ") + e.what(), path,
                              done);
      }
      pca.add(data);
      done += m;
    }
    result.basis = pca.finalize();
  }

  if (!o.space.style_w) {
    const std::uint64_t reg_count = o.regression_samples ? o.regression_samples : o.samples;
    DirectionRegressor reg(desc.latent_dim, k);
    std::uint64_t done = 0;
    while (done < reg_count) {
      const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(o.batch_size, reg_count - done));
      std::pair<Eigen::MatrixXd, Eigen::MatrixXd> batch;
      try {
        batch = fetch(m, o.samples + done);
      } catch (const std::exception& e) {
        Checkpoint c{"regression", o.samples, {}, result.basis};
        const auto path = write_checkpoint(o, identity, c);
        throw PartialFitError(std::string("bridge failed during regression sampling: ") + e.what(),
                              path, o.samples);
      }
      reg.add(batch.first, project_rows(result.basis, batch.second));
      done += m;
    }
    result.directions = reg.solve(o.space.to_string());
    result.directions->seed = o.seed;
    result.directions->bridge_descriptor_hash = descriptor_hash(desc);
  }

  if (o.out_dir) {
    std::filesystem::create_directories(*o.out_dir);
    BasisProvenance prov;
    prov.created_from = "pipeline_fit " + o.space.to_string();
    prov.space = o.space.to_string();
    prov.seed = o.seed;
    prov.batch_size = o.batch_size;
    prov.bridge_descriptor_hash = descriptor_hash(desc);
    const auto basis_path = *o.out_dir / "basis.gspc";
    save_basis(result.basis, basis_path, prov);
    result.artifacts.push_back(basis_path);
    if (result.directions) {
      const auto dir_path = *o.out_dir / "directions.gspc";
      save_directions(*result.directions, dir_path);
      result.artifacts.push_back(dir_path);
    }
  }
  return result;
}

}  // namespace layerpca
