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

#include "layerpca/pca.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "json.hpp"

#include "layerpca/errors.hpp"
#include "layerpca/linalg.hpp"
#include "layerpca/tensor.hpp"

namespace layerpca {

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  auto s = p;
  s.replace_extension(".json");
  return s;
}

// Right singular vectors and singular values of a tall or wide matrix. Tall
// inputs are reduced to their d x d R factor first.
void thin_svd(const Eigen::MatrixXd& m, Eigen::MatrixXd& v, Eigen::VectorXd& s) {
  if (m.rows() > m.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(m.cols()).template triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinV);
    v = svd.matrixV();
    s = svd.singularValues();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    v = svd.matrixV();
    s = svd.singularValues();
  }
}

}  // namespace

IncrementalPca::IncrementalPca(Eigen::Index dim, Eigen::Index components,
                               std::size_t batch_size)
    : dim_(dim), k_(components), batch_size_(batch_size) {
  if (dim <= 0) throw DimensionError("PCA dimension must be positive");
  if (components <= 0 || components > dim) {
    throw DimensionError("PCA component count " + std::to_string(components) +
                         " outside [1, " + std::to_string(dim) + "]");
  }
  if (batch_size == 0) throw RangeError("batch size must be positive");
  sum_ = Eigen::VectorXd::Zero(dim);
  buffer_.resize(static_cast<Eigen::Index>(batch_size), dim);
}

void IncrementalPca::add(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.cols() != dim_) {
    throw DimensionError("sample dimension " + std::to_string(samples.cols()) +
                         " != " + std::to_string(dim_));
  }
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    if (!samples.row(r).allFinite()) {
      throw DataError("non-finite value in sample " + std::to_string(seen_), seen_);
    }
    buffer_.row(buffered_++) = samples.row(r);
    ++seen_;
    if (static_cast<std::size_t>(buffered_) == batch_size_) flush();
  }
}

void IncrementalPca::add_sample(const Eigen::Ref<const Eigen::VectorXd>& sample) {
  add(sample.transpose());
}

void IncrementalPca::flush() {
  if (buffered_ == 0) return;
  merge(buffer_.topRows(buffered_));
  buffered_ = 0;
}

void IncrementalPca::merge(const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  const Eigen::Index m = batch.rows();
  const Eigen::RowVectorXd batch_mean = batch.colwise().mean();
  const Eigen::Index prev_k = basis_.cols();

  Eigen::MatrixXd stacked;
  if (merged_ == 0) {
    stacked = batch.rowwise() - batch_mean;
  } else {
    const double n = static_cast<double>(merged_);
    const Eigen::RowVectorXd prev_mean = (sum_ / n).transpose();
    stacked.resize(prev_k + m + 1, dim_);
    stacked.topRows(prev_k) = singular_.asDiagonal() * basis_.transpose();
    stacked.middleRows(prev_k, m) = batch.rowwise() - batch_mean;
    stacked.row(prev_k + m) =
        std::sqrt(n * static_cast<double>(m) / (n + static_cast<double>(m))) *
        (prev_mean - batch_mean);
  }

  Eigen::MatrixXd v;
  Eigen::VectorXd s;
  thin_svd(stacked, v, s);
  const Eigen::Index keep = std::min<Eigen::Index>(k_, s.size());
  basis_ = v.leftCols(keep);
  singular_ = s.head(keep);

  sum_ += batch.colwise().sum().transpose();
  merged_ += static_cast<std::uint64_t>(m);
}

PrincipalBasis IncrementalPca::finalize() {
  flush();
  if (merged_ < static_cast<std::uint64_t>(k_) + 1) {
    throw InsufficientDataError("PCA needs at least " + std::to_string(k_ + 1) +
                                " samples, got " + std::to_string(merged_));
  }
  if (basis_.cols() < k_) {
    throw InsufficientDataError("batches too small to resolve " + std::to_string(k_) +
                                " components");
  }
  PrincipalBasis out;
  out.sample_count = merged_;
  out.mean = sum_ / static_cast<double>(merged_);
  out.basis = basis_;
  out.variances = singular_.array().square() / static_cast<double>(merged_ - 1);
  canonicalize_column_signs(out.basis);
  return out;
}

IncrementalPca::State IncrementalPca::checkpoint() {
  flush();
  return State{sum_, basis_, singular_, merged_};
}

IncrementalPca IncrementalPca::restore(const State& s, Eigen::Index components,
                                       std::size_t batch_size) {
  IncrementalPca p(s.sum.size(), components, batch_size);
  if (s.basis.rows() != s.sum.size() || s.basis.cols() != s.singular.size() ||
      s.basis.cols() > components) {
    throw DimensionError("inconsistent PCA checkpoint");
  }
  p.sum_ = s.sum;
  p.basis_ = s.basis;
  p.singular_ = s.singular;
  p.merged_ = s.merged;
  p.seen_ = s.merged;
  return p;
}

PrincipalBasis fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       Eigen::Index components, std::size_t batch_size) {
  if (samples.rows() < components + 1) {
    throw InsufficientDataError("PCA needs at least " + std::to_string(components + 1) +
                                " samples, got " + std::to_string(samples.rows()));
  }
  IncrementalPca pca(samples.cols(), components, batch_size);
  pca.add(samples);
  return pca.finalize();
}

ComponentCoordinates project(const PrincipalBasis& b,
                             const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != b.dim()) {
    throw DimensionError("project: vector dim " + std::to_string(v.size()) +
                         " != basis dim " + std::to_string(b.dim()));
  }
  return b.basis.transpose() * (v - b.mean);
}

Eigen::MatrixXd project_rows(const PrincipalBasis& b,
                             const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (samples.cols() != b.dim()) throw DimensionError("project: sample dim mismatch");
  return (samples.rowwise() - b.mean.transpose()) * b.basis;
}

Eigen::VectorXd reconstruct(const PrincipalBasis& b,
                            const Eigen::Ref<const Eigen::VectorXd>& x,
                            std::optional<Eigen::Index> k_used) {
  const Eigen::Index k = k_used.value_or(b.components());
  if (k < 0 || k > b.components()) {
    throw RangeError("reconstruct: prefix " + std::to_string(k) + " exceeds K = " +
                     std::to_string(b.components()));
  }
  if (x.size() < k) throw DimensionError("reconstruct: coordinate vector shorter than prefix");
  return b.mean + b.basis.leftCols(k) * x.head(k);
}

Eigen::VectorXd reduced_projection(const PrincipalBasis& b,
                                   const Eigen::Ref<const Eigen::VectorXd>& v,
                                   Eigen::Index k_used) {
  return reconstruct(b, project(b, v), k_used);
}

std::vector<std::pair<Eigen::Index, double>> variance_spectrum(const PrincipalBasis& b) {
  const double total = b.variances.sum();
  if (!(total > 0.0)) throw RangeError("variance spectrum is all zero");
  std::vector<std::pair<Eigen::Index, double>> out;
  out.reserve(static_cast<std::size_t>(b.variances.size()));
  double running = 0.0;
  for (Eigen::Index k = 0; k < b.variances.size(); ++k) {
    running += b.variances[k];
    out.emplace_back(k + 1, running / total);
  }
  return out;
}

void save_basis(const PrincipalBasis& b, const std::filesystem::path& gspc_path,
                const BasisProvenance& provenance) {
  save_tensors({to_tensor(b.mean), to_tensor(b.basis), to_tensor(b.variances)}, gspc_path);
  nlohmann::json meta = {
      {"kind", "basis"},
      {"dim", b.dim()},
      {"K", b.components()},
      {"N", b.sample_count},
      {"sign_convention", "maxabs-positive"},
      {"created_from", provenance.created_from},
      {"space", provenance.space},
      {"sampling", provenance.truncated_sampling ? "truncated" : "untruncated"},
      {"bridge_descriptor_hash", provenance.bridge_descriptor_hash},
  };
  if (provenance.seed) meta["seed"] = *provenance.seed;
  if (provenance.batch_size) meta["batch_size"] = *provenance.batch_size;
  std::ofstream out(sidecar_path(gspc_path));
  if (!out) throw IoError("cannot write basis sidecar for " + gspc_path.string());
  out << meta.dump(2) << '\n';
}

PrincipalBasis load_basis(const std::filesystem::path& gspc_path) {
  const auto ts = load_tensors(gspc_path);
  if (ts.size() != 3) {
    throw FormatError("archive", "basis archive must hold 3 tensors, found " +
                                     std::to_string(ts.size()));
  }
  PrincipalBasis b;
  b.mean = to_vector(ts[0]);
  b.basis = to_matrix(ts[1]);
  b.variances = to_vector(ts[2]);
  if (b.basis.rows() != b.mean.size() || b.basis.cols() != b.variances.size()) {
    throw DimensionError("basis archive tensors have inconsistent shapes");
  }
  std::ifstream in(sidecar_path(gspc_path));
  if (in) {
    const auto meta = nlohmann::json::parse(in);
    b.sample_count = meta.value("N", std::uint64_t{0});
    if (meta.value("dim", b.dim()) != b.dim() || meta.value("K", b.components()) != b.components()) {
      throw DimensionError("basis sidecar disagrees with archive shapes");
    }
  }
  return b;
}

}  // namespace layerpca
