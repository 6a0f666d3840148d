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

#include <complex>
#include <functional>
#include <string>
#include <string_view>

#include "spdmbi/spin_core.hpp"

namespace spdmbi {

using WarningSink = std::function<void(std::string_view)>;

// Writes to std::clog.
WarningSink default_warning_sink();

enum class SymmetryClass { Symmetric, Antisymmetric, None };

// Input-state selector shared by protocols, analytics and the CLI.
struct StateSpec {
  enum class Kind { Scs, Cat, Ghz };
  Kind kind = Kind::Scs;
  double theta = 0.0;  // cat branch angle, ignored otherwise

  static StateSpec scs() { return {Kind::Scs, 0.0}; }
  static StateSpec cat(double theta) { return {Kind::Cat, theta}; }
  static StateSpec ghz() { return {Kind::Ghz, 0.0}; }

  std::string label() const;
};

// Binomial coherent state, Dicke coefficients evaluated in log space.
StateVector spin_coherent(const SpinSystem& sys, double theta, double phi);

// Branch angle above which the two cat branches overlap noticeably.
double cat_critical_angle(const SpinSystem& sys);

// Symmetrized superposition of coherent states at theta and pi - theta,
// normalized exactly. Warns (does not throw) above cat_critical_angle.
StateVector spin_cat(const SpinSystem& sys, double theta,
                     const WarningSink& warn = default_warning_sink());

StateVector ghz(const SpinSystem& sys);

// SCS along +x, cat(theta) or GHZ.
StateVector make_state(const SpinSystem& sys, const StateSpec& spec,
                       const WarningSink& warn = default_warning_sink());

SymmetryClass symmetry_class(const StateVector& state, double tol = 1e-12);

struct ExchangeEigen {
  bool eigenstate = false;
  std::complex<double> eigenvalue{0.0, 0.0};
};

// Tests proportionality of exp(i pi Jx)|psi> to |psi>.
ExchangeEigen is_exchange_eigenstate(const StateVector& state, double tol = 1e-10);

// i^N as a complex number.
std::complex<double> i_power(int n);

}  // namespace spdmbi
