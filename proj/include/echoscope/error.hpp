// Copyright 2026 The Echoscope Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace echoscope {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input text could not be parsed (malformed JSON, CSV, timestamps).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that is missing fields or has fields of the wrong type.
class SchemaError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Values that parse but violate a domain constraint.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent options or run configuration.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A party pair that cannot be analysed (identical seeds, cross-country).
class InvalidPairError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A pair network that breaks its structural invariants.
class MalformedPairError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure in model estimation (rank deficiency, grouping).
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace echoscope
