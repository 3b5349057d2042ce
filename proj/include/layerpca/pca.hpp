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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace layerpca {

// Result of a principal component fit.
//   mean       d
//   basis      d x K, orthonormal columns, max-|entry| of each column positive
//   variances  K, descending, non-negative (sample covariance, N - 1 divisor)
struct PrincipalBasis {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;
  Eigen::VectorXd variances;
  std::uint64_t sample_count = 0;

  Eigen::Index dim() const noexcept { return basis.rows(); }
  Eigen::Index components() const noexcept { return basis.cols(); }
};

// Raw-unit coordinates x = V^T (v - mu). Divide entry k by sqrt(lambda_k) for
// standard-deviation units.
using ComponentCoordinates = Eigen::VectorXd;

inline constexpr std::size_t kDefaultBatchSize = 10000;
inline constexpr std::size_t kDefaultFeatureComponents = 128;

// Streaming PCA with mean-tracked batch merging (Ross et al. 2008): each
// buffered batch is centered, stacked under the current scaled basis plus a
// mean-shift row, and re-factored by a thin SVD truncated to K.
class IncrementalPca {
 public:
  IncrementalPca(Eigen::Index dim, Eigen::Index components,
                 std::size_t batch_size = kDefaultBatchSize);

  // Rows are samples. Rows are buffered until `batch_size` are available.
  void add(const Eigen::Ref<const Eigen::MatrixXd>& samples);
  void add_sample(const Eigen::Ref<const Eigen::VectorXd>& sample);

  // Merges any buffered rows and returns the fitted basis. The model stays
  // usable; more samples may be added afterwards.
  PrincipalBasis finalize();

  std::uint64_t samples_seen() const noexcept { return seen_; }
  Eigen::Index dim() const noexcept { return dim_; }
  Eigen::Index components() const noexcept { return k_; }
  std::size_t batch_size() const noexcept { return batch_size_; }

  // Checkpointing: the merged state only (buffered rows are flushed first).
  struct State {
    Eigen::VectorXd sum;
    Eigen::MatrixXd basis;     // d x k_current
    Eigen::VectorXd singular;  // k_current
    std::uint64_t merged = 0;
  };
  State checkpoint();
  static IncrementalPca restore(const State& s, Eigen::Index components,
                                std::size_t batch_size);

 private:
  void flush();
  void merge(const Eigen::Ref<const Eigen::MatrixXd>& batch);

  Eigen::Index dim_;
  Eigen::Index k_;
  std::size_t batch_size_;

  Eigen::VectorXd sum_;
  Eigen::MatrixXd basis_;     // d x k_current
  Eigen::VectorXd singular_;  // k_current
  std::uint64_t merged_ = 0;

  Eigen::MatrixXd buffer_;
  Eigen::Index buffered_ = 0;
  std::uint64_t seen_ = 0;
};

PrincipalBasis fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       Eigen::Index components,
                       std::size_t batch_size = kDefaultBatchSize);

ComponentCoordinates project(const PrincipalBasis& b,
                             const Eigen::Ref<const Eigen::VectorXd>& v);
// Rows of `samples` projected; result is N x K.
Eigen::MatrixXd project_rows(const PrincipalBasis& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& samples);

// mu + V_{1..k_used} x_{1..k_used}. `x` may be longer than k_used.
Eigen::VectorXd reconstruct(const PrincipalBasis& b,
                            const Eigen::Ref<const Eigen::VectorXd>& x,
                            std::optional<Eigen::Index> k_used = std::nullopt);

// V_K V_K^T (v - mu) + mu.
Eigen::VectorXd reduced_projection(const PrincipalBasis& b,
                                   const Eigen::Ref<const Eigen::VectorXd>& v,
                                   Eigen::Index k_used);

// (k, cumulative fraction) with k counted from 1.
std::vector<std::pair<Eigen::Index, double>> variance_spectrum(const PrincipalBasis& b);

struct BasisProvenance {
  std::string created_from;
  std::string space;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> batch_size;
  std::string bridge_descriptor_hash;
  bool truncated_sampling = false;
};

// Writes `<stem>.gspc` (mean, basis, variances) and `<stem>.json` sidecar.
void save_basis(const PrincipalBasis& b, const std::filesystem::path& gspc_path,
                const BasisProvenance& provenance = {});
PrincipalBasis load_basis(const std::filesystem::path& gspc_path);

}  // namespace layerpca
