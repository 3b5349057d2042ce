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

#include <Eigen/Dense>

namespace layerpca {

// Relative singular-value floor below which a system is considered rank
// deficient.
inline constexpr double kRankTolerance = 1e-10;

// argmin_X ||A X - B||_F for tall, full-column-rank A (m >= n). Solved by a
// thin SVD; throws RankError (index = weakest right singular direction's
// dominant column) when sigma_min < kRankTolerance * sigma_max.
Eigen::MatrixXd solve_least_squares(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b);

// Flip each column so its largest-magnitude entry is positive (first index
// wins ties).
void canonicalize_column_signs(Eigen::MatrixXd& m);

}  // namespace layerpca
