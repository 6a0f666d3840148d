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

#include "spdmbi/states.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

namespace spdmbi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kAngleSlack = 1e-12;

// log of base^power with 0^0 = 1; returns -inf for 0^positive.
double log_power(double base, double power) {
  if (power == 0.0) return 0.0;
  if (base <= 0.0) return -std::numeric_limits<double>::infinity();
  return power * std::log(base);
}

}  // namespace

WarningSink default_warning_sink() {
  return [](std::string_view msg) { std::clog << "warning: " << msg << '\n'; };
}

std::string StateSpec::label() const {
  switch (kind) {
    case Kind::Scs: return "scs";
    case Kind::Ghz: return "ghz";
    case Kind::Cat: {
      std::ostringstream os;
      os << "cat:" << theta;
      return os.str();
    }
  }
  return "?";
}

std::complex<double> i_power(int n) {
  static const std::complex<double> cycle[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return cycle[((n % 4) + 4) % 4];
}

StateVector spin_coherent(const SpinSystem& sys, double theta, double phi) {
  if (!(theta >= -kAngleSlack && theta <= kPi + kAngleSlack))
    throw DomainError("spin_coherent: theta outside [0, pi]");
  if (!(phi >= -kAngleSlack && phi < 2 * kPi))
    throw DomainError("spin_coherent: phi outside [0, 2pi)");

  const double j = sys.j();
  const double c = std::abs(std::cos(0.5 * theta));
  const double s = std::abs(std::sin(0.5 * theta));
  const double log_norm = std::lgamma(2 * j + 1);

  StateVector::Coefficients coeffs(sys.dim());
  for (Index row = 0; row < sys.dim(); ++row) {
    const double m = sys.m_at(row);
    const double log_mag = 0.5 * (log_norm - std::lgamma(j + m + 1) - std::lgamma(j - m + 1)) +
                           log_power(c, j + m) + log_power(s, j - m);
    coeffs(row) = std::polar(std::exp(log_mag), -m * phi);
  }
  return StateVector(std::move(coeffs));
}

double cat_critical_angle(const SpinSystem& sys) {
  const double j = sys.j();
  if (j < 1) return 0.5 * kPi;
  const double log_ratio = 2 * std::lgamma(j) - std::log(2.0) - std::lgamma(2 * j + 1);
  const double arg = 2 * std::exp(log_ratio / (2 * j));
  return arg >= 1 ? 0.5 * kPi : std::asin(arg);
}

StateVector spin_cat(const SpinSystem& sys, double theta, const WarningSink& warn) {
  if (!(theta >= -kAngleSlack && theta <= 0.5 * kPi + kAngleSlack))
    throw DomainError("spin_cat: theta outside [0, pi/2]");
  if (warn && theta > cat_critical_angle(sys)) {
    std::ostringstream os;
    os << "spin_cat: theta = " << theta << " exceeds the quasi-orthogonal bound "
       << cat_critical_angle(sys) << " for N = " << sys.n_particles();
    warn(os.str());
  }
  const StateVector branch = spin_coherent(sys, std::max(theta, 0.0), 0.0);
  const Index d = sys.dim();
  StateVector::Coefficients sym(d);
  for (Index row = 0; row < d; ++row) sym(row) = branch[row] + branch[d - 1 - row];
  // Enforce exact symmetry against round-off in the addition order.
  for (Index row = 0; row < d / 2; ++row) sym(d - 1 - row) = sym(row);
  return StateVector(sym / sym.norm());
}

StateVector ghz(const SpinSystem& sys) { return spin_cat(sys, 0.0, nullptr); }

StateVector make_state(const SpinSystem& sys, const StateSpec& spec, const WarningSink& warn) {
  switch (spec.kind) {
    case StateSpec::Kind::Scs: return spin_coherent(sys, 0.5 * kPi, 0.0);
    case StateSpec::Kind::Cat: return spin_cat(sys, spec.theta, warn);
    case StateSpec::Kind::Ghz: return ghz(sys);
  }
  throw ContractViolation("make_state: unknown kind");
}

SymmetryClass symmetry_class(const StateVector& state, double tol) {
  const Index d = state.dim();
  double sym_dev = 0.0;
  double anti_dev = 0.0;
  for (Index row = 0; row < d; ++row) {
    const auto a = state[row];
    const auto b = state[d - 1 - row];
    sym_dev = std::max(sym_dev, std::abs(a - b));
    anti_dev = std::max(anti_dev, std::abs(a + b));
  }
  if (sym_dev <= tol) return SymmetryClass::Symmetric;
  // The m = 0 entry is covered: |C0 + C0| <= tol forces |C0| <= tol/2.
  if (anti_dev <= tol) return SymmetryClass::Antisymmetric;
  return SymmetryClass::None;
}

ExchangeEigen is_exchange_eigenstate(const StateVector& state, double tol) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  const OperatorMatrix exchange_dagger = rotation(sys, Axis::X, -kPi);
  const StateVector image = exchange_dagger * state;
  const std::complex<double> overlap = state.coeffs().dot(image.coeffs()) / state.coeffs().squaredNorm();
  const double residual = (image.coeffs() - overlap * state.coeffs()).norm();
  if (residual > tol) return {};
  return {true, overlap};
}

}  // namespace spdmbi
