/* Copyright 2026 The spdmbi Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace spdmbi {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Closed form exists only for a subset of inputs (e.g. even N).
class UnsupportedDomainError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Caller broke a precondition (non-Hermitian generator, mismatched dims).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Numerical result failed a consistency check.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSlopeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace spdmbi
