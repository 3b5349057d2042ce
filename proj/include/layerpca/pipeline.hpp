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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "layerpca/bridge.hpp"
#include "layerpca/direction.hpp"
#include "layerpca/errors.hpp"
#include "layerpca/pca.hpp"

namespace layerpca {

// "style-w", "feature@<layer>" or "feature@<layer>:pre|post".
struct FitSpace {
  bool style_w = true;
  std::size_t layer = 0;
  Tap tap = Tap::post;

  static FitSpace parse(const std::string& s);
  std::string to_string() const;
};

struct FitOptions {
  FitSpace space;
  std::uint64_t samples = 10000;
  // 0 selects the default: full rank for style-w, min(128, size) for features.
  Eigen::Index components = 0;
  std::uint64_t seed = 0;
  std::size_t batch_size = kDefaultBatchSize;
  // Latents for direction regression; 0 means the same count as `samples`.
  // They are drawn from the same seed at indices [samples, samples + count).
  std::uint64_t regression_samples = 0;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> resume_from;
};

struct FitResult {
  PrincipalBasis basis;
  std::optional<PrincipalDirections> directions;
  std::vector<std::filesystem::path> artifacts;
};

// The bridge failed part-way; `checkpoint()` can be passed back as
// FitOptions::resume_from.
class PartialFitError : public Error {
 public:
  PartialFitError(const std::string& what, std::filesystem::path checkpoint,
                  std::uint64_t samples_done)
      : Error(what), checkpoint_(std::move(checkpoint)), samples_done_(samples_done) {}
  const std::filesystem::path& checkpoint() const noexcept { return checkpoint_; }
  std::uint64_t samples_done() const noexcept { return samples_done_; }

 private:
  std::filesystem::path checkpoint_;
  std::uint64_t samples_done_;
};

// sample -> (map | features) -> incremental PCA, then for feature spaces
// project fresh samples and regress latent directions. Writes basis (and
// directions) with provenance sidecars into out_dir when set.
FitResult pipeline_fit(GeneratorBridge& bridge, const FitOptions& options);

}  // namespace layerpca
