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

#include "layerpca/tensor.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "layerpca/errors.hpp"

namespace layerpca {

namespace {

static_assert(sizeof(float) == 4);

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

void read_exact(std::istream& in, void* dst, std::size_t n, const char* field) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw FormatError(field, "truncated stream");
  }
}

}  // namespace

TensorBlock::TensorBlock(std::vector<std::uint32_t> d, std::vector<float> v)
    : dims(std::move(d)), data(std::move(v)) {
  if (element_count(dims) != data.size()) {
    throw DimensionError("tensor dims imply " + std::to_string(element_count(dims)) +
                         " elements, data has " + std::to_string(data.size()));
  }
}

TensorBlock::TensorBlock(std::vector<std::uint32_t> d)
    : dims(std::move(d)), data(element_count(dims), 0.0f) {}

std::size_t TensorBlock::element_count(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

std::size_t write_tensor(const TensorBlock& t, std::ostream& sink) {
  if (t.dims.size() > 255) throw DimensionError("GSPC supports at most 255 dims");
  if (TensorBlock::element_count(t.dims) != t.data.size()) {
    throw DimensionError("tensor dims disagree with data length");
  }
  std::string header(kGspcMagic, 4);
  header.push_back(static_cast<char>(kGspcVersion));
  header.push_back(static_cast<char>(kGspcFloat32));
  header.push_back(static_cast<char>(t.dims.size()));
  for (auto d : t.dims) put_u32(header, d);

  std::string payload(t.data.size() * 4, '\0');
  for (std::size_t i = 0; i < t.data.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(t.data[i]);
    for (int b = 0; b < 4; ++b) {
      payload[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
  }
  sink.write(header.data(), static_cast<std::streamsize>(header.size()));
  sink.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!sink) throw IoError("failed writing GSPC tensor");
  return header.size() + payload.size();
}

TensorBlock read_tensor(std::istream& source) {
  std::array<unsigned char, 7> head{};
  read_exact(source, head.data(), 4, "magic");
  if (std::memcmp(head.data(), kGspcMagic, 4) != 0) {
    throw FormatError("magic", "expected \"GSPC\"");
  }
  read_exact(source, head.data() + 4, 1, "version");
  if (head[4] != kGspcVersion) {
    throw FormatError("version", "unsupported version " + std::to_string(head[4]));
  }
  read_exact(source, head.data() + 5, 1, "dtype");
  if (head[5] != kGspcFloat32) {
    throw FormatError("dtype", "unsupported dtype " + std::to_string(head[5]));
  }
  read_exact(source, head.data() + 6, 1, "ndim");
  const std::size_t ndim = head[6];

  std::vector<unsigned char> raw_dims(4 * ndim);
  read_exact(source, raw_dims.data(), raw_dims.size(), "dims");
  std::vector<std::uint32_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i) dims[i] = get_u32(raw_dims.data() + 4 * i);

  const std::size_t n = TensorBlock::element_count(dims);
  std::vector<unsigned char> raw(4 * n);
  read_exact(source, raw.data(), raw.size(), "payload");
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = std::bit_cast<float>(get_u32(raw.data() + 4 * i));
  }
  return TensorBlock(std::move(dims), std::move(data));
}

std::string encode_tensor(const TensorBlock& t) {
  std::ostringstream os(std::ios::binary);
  write_tensor(t, os);
  return std::move(os).str();
}

TensorBlock decode_tensor(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_tensor(is);
}

void save_tensor(const TensorBlock& t, const std::filesystem::path& path) {
  save_tensors({t}, path);
}

TensorBlock load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_tensor(in);
}

void save_tensors(const std::vector<TensorBlock>& ts,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& t : ts) write_tensor(t, out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TensorBlock> load_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TensorBlock> out;
  while (in.peek() != std::char_traits<char>::eof()) out.push_back(read_tensor(in));
  return out;
}

TensorBlock to_tensor(const Eigen::VectorXd& v) {
  TensorBlock t({static_cast<std::uint32_t>(v.size())});
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v[i]);
  return t;
}

TensorBlock to_tensor(const Eigen::MatrixXd& m) {
  TensorBlock t({static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())});
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data[k++] = static_cast<float>(m(r, c));
  return t;
}

Eigen::VectorXd to_vector(const TensorBlock& t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.data.size()));
  for (std::size_t i = 0; i < t.data.size(); ++i) v[static_cast<Eigen::Index>(i)] = t.data[i];
  return v;
}

Eigen::MatrixXd to_matrix(const TensorBlock& t) {
  if (t.dims.size() == 1) return to_vector(t);
  if (t.dims.size() != 2) throw DimensionError("expected a 2-D tensor");
  Eigen::MatrixXd m(t.dims[0], t.dims[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = t.data[k++];
  return m;
}

}  // namespace layerpca
