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
#include <stdexcept>
#include <string>

namespace layerpca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed GSPC stream. `field()` names the header field (or "payload")
// that failed to parse.
class FormatError : public Error {
 public:
  FormatError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RankError : public Error {
 public:
  RankError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}
  // Offending column/component, or -1 when not attributable.
  std::ptrdiff_t index() const noexcept { return index_; }

 private:
  std::ptrdiff_t index_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t sample_index)
      : Error(what), sample_index_(sample_index) {}
  std::size_t sample_index() const noexcept { return sample_index_; }

 private:
  std::size_t sample_index_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Violation of a JSON schema; `pointer()` is an RFC 6901 path.
class SchemaError : public Error {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : Error(pointer + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class BridgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace layerpca
