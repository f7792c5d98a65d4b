// Copyright 2026 The Coreaug Authors.
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

#ifndef COREAUG_ERRORS_HPP_
#define COREAUG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace coreaug {

// Broad failure classes. The CLI maps them onto process exit codes.
enum class ErrorKind {
  kConfig = 2,
  kData = 3,
  kNumerical = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::kData, what) {}
};

// Raised when an iterative routine fails to converge. Carries the residual
// at the point of giving up.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(ErrorKind::kNumerical, what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace coreaug

#endif  // COREAUG_ERRORS_HPP_
