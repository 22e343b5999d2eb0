// Copyright 2026 The textdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace textdistill {

// Base of every error the library throws. The CLI maps any of these to a
// single-line diagnostic and a nonzero exit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A configuration value is out of range or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data is malformed or violates a data contract.
class DataError : public Error {
 public:
  using Error::Error;
};

// An operation precondition (sequence length, nonempty axis) is violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// NaN or infinite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backward from a non-scalar.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace textdistill
