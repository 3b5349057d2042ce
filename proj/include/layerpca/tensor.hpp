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
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace layerpca {

// Dense row-major float32 array. Serialized as GSPC:
//   "GSPC" | version u8 = 1 | dtype u8 = 1 (f32) | ndim u8 | ndim x u32 LE |
//   payload f32 LE, row-major.
struct TensorBlock {
  std::vector<std::uint32_t> dims;
  std::vector<float> data;

  TensorBlock() = default;
  TensorBlock(std::vector<std::uint32_t> dims, std::vector<float> data);
  explicit TensorBlock(std::vector<std::uint32_t> dims);

  static std::size_t element_count(const std::vector<std::uint32_t>& dims);
  std::size_t size() const noexcept { return data.size(); }

  friend bool operator==(const TensorBlock&, const TensorBlock&) = default;
};

inline constexpr char kGspcMagic[4] = {'G', 'S', 'P', 'C'};
inline constexpr std::uint8_t kGspcVersion = 0x01;
inline constexpr std::uint8_t kGspcFloat32 = 0x01;

std::size_t write_tensor(const TensorBlock& t, std::ostream& sink);
TensorBlock read_tensor(std::istream& source);

std::string encode_tensor(const TensorBlock& t);
TensorBlock decode_tensor(const std::string& bytes);

void save_tensor(const TensorBlock& t, const std::filesystem::path& path);
TensorBlock load_tensor(const std::filesystem::path& path);

// A `.gspc` archive is a plain concatenation of GSPC tensors.
void save_tensors(const std::vector<TensorBlock>& ts,
                  const std::filesystem::path& path);
std::vector<TensorBlock> load_tensors(const std::filesystem::path& path);

TensorBlock to_tensor(const Eigen::VectorXd& v);
TensorBlock to_tensor(const Eigen::MatrixXd& m);
Eigen::VectorXd to_vector(const TensorBlock& t);
// 2-D tensor (or 1-D, as a column) into a matrix.
Eigen::MatrixXd to_matrix(const TensorBlock& t);

}  // namespace layerpca
