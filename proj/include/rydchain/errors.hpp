// Copyright 2026 The rydchain Authors
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

#include <stdexcept>
#include <string>

namespace rydchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input (parameters, dimensions, configuration).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its domain (e.g. j == k, V1 != -V2).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed: step-size underflow, invariant violation,
/// non-convergence that the caller asked to be fatal.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Request exceeds a configured resource guard (e.g. too many sites for the
/// exact solver).
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace rydchain
