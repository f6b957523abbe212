// Copyright 2026 The StyleRL Authors.
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

#ifndef STYLERL_ERRORS_H_
#define STYLERL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace stylerl {

// Base class for all errors raised by the library. Each subclass maps onto one
// failure category so that the command-line front end can pick an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Numerical gradient check could not be carried out.
class CheckError : public Error {
 public:
  using Error::Error;
};

// Malformed text input (embedding files, configs, corpora).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that disagrees with its own header or schema.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid or incomplete configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or inconsistent data files.
class DataError : public Error {
 public:
  using Error::Error;
};

// File system failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Checkpoint checksum or container mismatch.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace stylerl

#endif  // STYLERL_ERRORS_H_
