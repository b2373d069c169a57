// Copyright 2026 The mfteams Authors
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

#ifndef MFTEAMS_ERRORS_H_
#define MFTEAMS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mfteams {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// Malformed input document (JSON syntax, missing keys, wrong types).
class ParseError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "parse"; }
};

// A well-formed document that violates a model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// A lattice, support or prescription set would exceed its configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "capacity"; }
};

// Raised in pure-only mode when a stage game has no pure equilibrium.
class NoPureEquilibriumError : public Error {
 public:
  NoPureEquilibriumError(int stage, std::string point, const std::string& what)
      : Error(what), stage_(stage), point_(std::move(point)) {}
  const char* kind() const noexcept override { return "no_pure_equilibrium"; }
  int stage() const { return stage_; }
  const std::string& point() const { return point_; }

 private:
  int stage_;
  std::string point_;
};

// Support enumeration exhausted its bound without certifying an equilibrium.
class NotFoundError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_found"; }
};

}  // namespace mfteams

#endif  // MFTEAMS_ERRORS_H_
