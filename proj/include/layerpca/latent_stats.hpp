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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "layerpca/pca.hpp"

namespace layerpca {

// Uniform bins over [lo, hi] of one coordinate. A value on an interior edge
// belongs to the bin that edge opens; hi itself falls in the last bin.
struct MarginalHistogram {
  Eigen::Index component = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  double width() const noexcept { return (hi - lo) / double(counts.size()); }
  std::size_t bin_of(double x) const noexcept;
  double mean() const;
};

MarginalHistogram marginal_histogram(const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                     Eigen::Index component, std::size_t bins);

// Plug-in entropy in bits; empty bins contribute nothing.
double entropy(const MarginalHistogram& h);
double plugin_entropy(const std::vector<std::uint64_t>& counts, std::uint64_t total);

// Plug-in mutual information in bits from a bins x bins joint histogram,
// computed as H(a) + H(b) - H(a, b) with marginals taken from the joint.
// Arguments are ordered (min, max) first, so I(j,k) and I(k,j) are the same
// computation, and I(j,j) reduces exactly to H(j) at the same binning.
double mutual_information(const Eigen::Ref<const Eigen::MatrixXd>& coords, Eigen::Index j,
                          Eigen::Index k, std::size_t bins);

// Expected plug-in MI of independent variables: (B-1)^2 / (2 N ln 2).
double plugin_mi_bias(std::size_t bins, std::uint64_t n);

struct IndependenceReport {
  std::vector<Eigen::Index> components;
  std::vector<double> entropies;          // bits, per selected component
  Eigen::MatrixXd mutual_information;     // bits
  std::size_t bins = 0;
  std::uint64_t samples = 0;
  double bias_estimate = 0.0;
  std::vector<std::string> warnings;
};

// Entropies and the pairwise MI matrix over `components` (default: the first
// min(32, K)). Entropies share the joint binning so I_jj == H_j.
IndependenceReport independence_report(const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                       std::vector<Eigen::Index> components, std::size_t bins);

nlohmann::json report_to_json(const IndependenceReport& r);
// One row per selected component: j, H_j, lambda_j, cumulative variance.
std::string report_to_csv(const IndependenceReport& r, const PrincipalBasis& b);

// One [count, B] counts tensor plus a `.json` sidecar with component, lo,
// hi and total per row. All histograms must share B; counts above 2^24 are
// rejected since the payload is float32.
void save_histograms(const std::vector<MarginalHistogram>& hs, const std::filesystem::path& path);
std::vector<MarginalHistogram> load_histograms(const std::filesystem::path& path);

// Draws x_j independently by inverse-CDF sampling from histograms[j]
// (uniform within the chosen bin) and returns V_r x + mu for r =
// histograms.size(). histograms[j] must describe component j.
Eigen::VectorXd replacement_sampler(const std::vector<MarginalHistogram>& histograms,
                                    const PrincipalBasis& b, std::uint64_t seed,
                                    std::uint64_t draw_index = 0);

}  // namespace layerpca
