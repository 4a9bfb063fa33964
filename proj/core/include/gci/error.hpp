/*
Copyright 2026 The gcinet Authors. All rights reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// Exception hierarchy shared by every gcinet module.  The CLI maps these
// onto process exit codes (see tools/gcinet/main.cpp).

#ifndef GCI_ERROR_HPP_
#define GCI_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace gci {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system problems: missing, unreadable or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

class WavError : public IoError {
 public:
  enum class Kind { kMissingFile, kNotMono, kUnsupportedEncoding, kMalformed };

  WavError(Kind kind, const std::string& what) : IoError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Content that violates a data contract (labels, signals, manifests).
class DataError : public Error {
 public:
  using Error::Error;
};

// Corrupt or version-mismatched binary containers.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid or mutually inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced during computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gci

#endif  // GCI_ERROR_HPP_
