// Copyright 2026 The relpcnn Authors.
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

#ifndef RELPCNN_ERRORS_H_
#define RELPCNN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace relpcnn {

// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kConfig,   // invalid configuration, shape mismatch, bad usage
  kData,     // unreadable or malformed input data
  kNumeric,  // non-finite values
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Malformed corpus markup or relation lines.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string &message)
      : Error(ErrorKind::kData, message) {}
};

// A relation that cannot be joined to its document and entities.
class ResolveError : public Error {
 public:
  explicit ResolveError(const std::string &message)
      : Error(ErrorKind::kData, message) {}
};

// A relation tuple that cannot be turned into a model instance.
class InstanceError : public Error {
 public:
  explicit InstanceError(const std::string &message)
      : Error(ErrorKind::kData, message) {}
};

// Embedding file problems and other I/O failures.
class LoadError : public Error {
 public:
  explicit LoadError(const std::string &message)
      : Error(ErrorKind::kData, message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string &message)
      : Error(ErrorKind::kConfig, message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string &message)
      : Error(ErrorKind::kConfig, message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string &message)
      : Error(ErrorKind::kNumeric, message) {}
};

}  // namespace relpcnn

#endif  // RELPCNN_ERRORS_H_
