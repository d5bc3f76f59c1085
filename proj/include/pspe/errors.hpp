// Copyright 2026 The pspe Authors.
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

namespace pspe {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector that must be a probability distribution fails the simplex check.
struct InvalidDistribution : Error {
  using Error::Error;
};

// Dimension or size mismatch between related containers.
struct InvalidShape : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

// The optimal-policy set difference is empty; callers resample instead.
struct EmptyDifference : Error {
  using Error::Error;
};

// Exhaustive policy enumeration would exceed the configured limit.
struct TooManyPolicies : Error {
  using Error::Error;
};

// Too few usable points to fit a decay rate.
struct DegenerateWindow : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct InvalidConfig : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace pspe
