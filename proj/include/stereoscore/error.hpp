// Copyright 2026 The stereoscore Authors
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

namespace stereoscore {

// Base of every error raised by the toolkit. The subclasses map onto the
// HTTP status codes used by the annotation service.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file or record (bad JSON line, missing column, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A value violates a domain invariant (best == worst, ratios not summing to 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// The request is valid but clashes with existing state.
class ConflictError : public Error {
 public:
  using Error::Error;
};

// An upstream step has not been run yet (e.g. exporting scores before a fit).
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

// Numerical routine failed: non-convergence, disconnected graph, divergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace stereoscore
