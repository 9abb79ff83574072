// Copyright 2026 The diamondlab Authors
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

namespace diamondlab {

/// Subsystem or shape mismatch.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition or representation invariant does not hold.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter is outside the range the operation is defined on.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Weingarten evaluation beyond the implemented orders.
struct UnsupportedOrder : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Weingarten function evaluated at a pole (d^2 - 1 = 0).
struct PoleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// File-system or serialization failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace diamondlab
