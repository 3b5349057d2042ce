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

#include "layerpca/linalg.hpp"

#include <cmath>
#include <string>

#include "layerpca/errors.hpp"

namespace layerpca {

Eigen::MatrixXd solve_least_squares(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("least squares: A has " + std::to_string(a.rows()) +
                         " rows, B has " + std::to_string(b.rows()));
  }
  if (a.rows() < a.cols()) {
    throw RankError("least squares: underdetermined system (" +
                    std::to_string(a.rows()) + " < " + std::to_string(a.cols()) + ")");
  }
  if (a.cols() == 0) return Eigen::MatrixXd(0, b.cols());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  if (!(smax > 0.0) || smin < kRankTolerance * smax) {
    Eigen::Index worst = 0;
    svd.matrixV().col(s.size() - 1).cwiseAbs().maxCoeff(&worst);
    throw RankError("least squares: rank deficient (sigma_min/sigma_max = " +
                        std::to_string(smax > 0.0 ? smin / smax : 0.0) +
                        "), weakest column " + std::to_string(worst),
                    worst);
  }
  const Eigen::MatrixXd utb = svd.matrixU().transpose() * b;
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * utb;
}

void canonicalize_column_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double v = std::abs(m(r, c));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (m.rows() > 0 && m(best, c) < 0.0) m.col(c) = -m.col(c);
  }
}

}  // namespace layerpca
