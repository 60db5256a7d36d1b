// Copyright 2026 The motorgrad Authors
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

#ifndef MOTORGRAD_ERRORS_H_
#define MOTORGRAD_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace motorgrad {

// Bad shapes, out-of-domain parameters, empty inputs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Factorization failures and non-finite intermediate results.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every eligibility in a batch is zero, so score-function estimates carry no
// information (e.g. noise disabled) and the optimal baseline is undefined.
class DegenerateBatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fewer trials than model features.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid experiment configuration. `line` is 1-based, 0 when
// unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, std::string field, const std::string& message)
      : std::runtime_error(format(line, field, message)),
        line_(line),
        field_(std::move(field)),
        message_(message) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(int line, const std::string& field,
                            const std::string& message) {
    std::string out = "config error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in field '" + field + "'";
    return out + ": " + message;
  }

  int line_;
  std::string field_;
  std::string message_;
};

// Files that cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace motorgrad

#endif  // MOTORGRAD_ERRORS_H_
