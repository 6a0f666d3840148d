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

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "spdmbi/errors.hpp"

namespace spdmbi {

using Index = Eigen::Index;

// Default contract tolerances. N = 100 sweeps accumulate round-off, so every
// check takes one of these by value instead of hard-coding a number.
struct Tolerances {
  double hermitian = 1e-12;
  double unitary = 1e-10;
  double norm = 1e-10;
  double imaginary = 1e-10;
  double density_hermitian = 1e-10;
  double density_trace = 1e-8;
  double density_min_eigenvalue = -1e-8;
};

// N spin-1/2 particles in the symmetric sector: J = N/2, Dicke basis ordered
// m = J, J-1, ..., -J.
class SpinSystem {
 public:
  explicit SpinSystem(int n_particles) : n_(n_particles) {
    if (n_particles < 1) throw DomainError("SpinSystem: n_particles must be >= 1");
  }

  static SpinSystem from_dim(Index dim) { return SpinSystem(static_cast<int>(dim) - 1); }

  int n_particles() const { return n_; }
  double j() const { return 0.5 * n_; }
  Index dim() const { return n_ + 1; }
  bool integer_spin() const { return n_ % 2 == 0; }

  double m_at(Index row) const { return j() - static_cast<double>(row); }
  Index row_of(double m) const { return static_cast<Index>(std::lround(j() - m)); }

  friend bool operator==(const SpinSystem&, const SpinSystem&) = default;

 private:
  int n_;
};

enum class Component { Jx, Jy, Jz, Jplus, Jminus, Jz2, Jx2, Jy2 };
enum class Axis { X, Y, Z };
enum class Ladder { Raise, Lower };

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
Real max_abs(const CMatrix<Real>& m) {
  return m.size() == 0 ? Real(0) : m.cwiseAbs().maxCoeff();
}

template <typename Real>
bool is_diagonal(const CMatrix<Real>& m) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (r != c && m(r, c) != std::complex<Real>(0)) return false;
  return true;
}

template <typename Real>
class BasicOperator {
 public:
  using Scalar = std::complex<Real>;
  using Dense = CMatrix<Real>;

  BasicOperator() = default;

  // Hints are checked on construction; a false claim is a contract violation.
  explicit BasicOperator(Dense entries, bool hermitian = false, bool unitary = false,
                         const Tolerances& tol = {})
      : entries_(std::move(entries)), hermitian_(hermitian), unitary_(unitary) {
    if (entries_.rows() != entries_.cols())
      throw ContractViolation("OperatorMatrix: matrix must be square");
    if (hermitian_ && max_abs<Real>(entries_ - entries_.adjoint()) > tol.hermitian)
      throw ContractViolation("OperatorMatrix: hermitian hint violated");
    if (unitary_ &&
        max_abs<Real>(entries_.adjoint() * entries_ - Dense::Identity(dim(), dim())) > tol.unitary)
      throw ContractViolation("OperatorMatrix: unitary hint violated");
  }

  static BasicOperator identity(Index dim) {
    return BasicOperator(Dense::Identity(dim, dim), true, true);
  }

  const Dense& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }
  bool hermitian_hint() const { return hermitian_; }
  bool unitary_hint() const { return unitary_; }

  BasicOperator adjoint() const {
    return BasicOperator(entries_.adjoint(), hermitian_, unitary_, loose());
  }

 private:
  static Tolerances loose() {
    Tolerances t;
    t.hermitian = t.unitary = 1e300;
    return t;
  }

  Dense entries_;
  bool hermitian_ = false;
  bool unitary_ = false;
};

template <typename Real>
class BasicState {
 public:
  using Coefficients = CVector<Real>;

  BasicState() = default;
  explicit BasicState(Coefficients coeffs) : coeffs_(std::move(coeffs)) {}

  static BasicState basis(Index dim, Index row) {
    Coefficients c = Coefficients::Zero(dim);
    c(row) = 1;
    return BasicState(std::move(c));
  }

  const Coefficients& coeffs() const { return coeffs_; }
  Index dim() const { return coeffs_.size(); }
  std::complex<Real> operator[](Index row) const { return coeffs_(row); }
  Real norm() const { return coeffs_.norm(); }

  BasicState normalized() const { return BasicState(coeffs_ / coeffs_.norm()); }

 private:
  Coefficients coeffs_;
};

template <typename Real>
class BasicDensity {
 public:
  using Dense = CMatrix<Real>;

  BasicDensity() = default;
  explicit BasicDensity(Dense entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw ContractViolation("DensityMatrix: matrix must be square");
  }

  static BasicDensity pure(const BasicState<Real>& s) {
    return BasicDensity(s.coeffs() * s.coeffs().adjoint());
  }

  const Dense& matrix() const { return entries_; }
  Index dim() const { return entries_.rows(); }

  Real min_eigenvalue() const {
    Dense herm = Real(0.5) * (entries_ + entries_.adjoint());
    Eigen::SelfAdjointEigenSolver<Dense> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }

  // Throws NumericalError if Hermiticity, trace or positivity is off.
  void validate(const Tolerances& tol = {}) const {
    if (max_abs<Real>(entries_ - entries_.adjoint()) > tol.density_hermitian)
      throw NumericalError("DensityMatrix: not Hermitian");
    if (std::abs(entries_.trace() - std::complex<Real>(1)) > tol.density_trace)
      throw NumericalError("DensityMatrix: trace drifted from 1");
    if (min_eigenvalue() < tol.density_min_eigenvalue)
      throw NumericalError("DensityMatrix: negative eigenvalue");
  }

 private:
  Dense entries_;
};

using OperatorMatrix = BasicOperator<double>;
using StateVector = BasicState<double>;
using DensityMatrix = BasicDensity<double>;

// sqrt(j(j+1) - m(m +- 1)); exactly 0 past the ladder ends.
inline double ladder_coefficient(double j, double m, Ladder sign) {
  const double twice_j = 2.0 * j;
  if (j < 0 || std::abs(twice_j - std::round(twice_j)) > 1e-12)
    throw DomainError("ladder_coefficient: j must be a non-negative half-integer");
  const double offset = j - m;
  if (std::abs(offset - std::round(offset)) > 1e-12)
    throw DomainError("ladder_coefficient: j - m must be an integer");
  if (std::abs(m) > j + 1e-12) throw DomainError("ladder_coefficient: |m| > j");
  const double step = sign == Ladder::Raise ? 1.0 : -1.0;
  if (std::abs(m + step) > j + 1e-12) return 0.0;
  const double arg = j * (j + 1.0) - m * (m + step);
  return arg <= 0 ? 0.0 : std::sqrt(arg);
}

template <typename Real = double>
BasicOperator<Real> collective_operator(const SpinSystem& sys, Component which) {
  using Dense = CMatrix<Real>;
  using C = std::complex<Real>;
  const Index d = sys.dim();
  const double j = sys.j();

  auto raising = [&] {
    Dense up = Dense::Zero(d, d);
    // J+|m> = lambda+_m |m+1>; row index of m+1 is one above m.
    for (Index col = 1; col < d; ++col)
      up(col - 1, col) = static_cast<Real>(ladder_coefficient(j, sys.m_at(col), Ladder::Raise));
    return up;
  };
  auto jz = [&] {
    Dense z = Dense::Zero(d, d);
    for (Index r = 0; r < d; ++r) z(r, r) = static_cast<Real>(sys.m_at(r));
    return z;
  };
  auto jx = [&] {
    const Dense up = raising();
    return Dense(Real(0.5) * (up + up.adjoint()));
  };
  auto jy = [&] {
    const Dense up = raising();
    return Dense((up - up.adjoint()) / C(0, 2));
  };

  switch (which) {
    case Component::Jz: return BasicOperator<Real>(jz(), true);
    case Component::Jx: return BasicOperator<Real>(jx(), true);
    case Component::Jy: return BasicOperator<Real>(jy(), true);
    case Component::Jplus: return BasicOperator<Real>(raising());
    case Component::Jminus: return BasicOperator<Real>(Dense(raising().adjoint()));
    case Component::Jz2: {
      const Dense z = jz();
      return BasicOperator<Real>(z * z, true);
    }
    case Component::Jx2: {
      const Dense x = jx();
      return BasicOperator<Real>(x * x, true);
    }
    case Component::Jy2: {
      const Dense y = jy();
      return BasicOperator<Real>(y * y, true);
    }
  }
  throw ContractViolation("collective_operator: unknown component");
}

template <typename Real = double>
BasicOperator<Real> axis_operator(const SpinSystem& sys, Axis axis) {
  switch (axis) {
    case Axis::X: return collective_operator<Real>(sys, Component::Jx);
    case Axis::Y: return collective_operator<Real>(sys, Component::Jy);
    case Axis::Z: return collective_operator<Real>(sys, Component::Jz);
  }
  throw ContractViolation("axis_operator: unknown axis");
}

// Eigendecomposition of a Hermitian generator, reusable across a time grid.
template <typename Real>
class SpectralPropagator {
 public:
  using Dense = CMatrix<Real>;
  using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

  explicit SpectralPropagator(const BasicOperator<Real>& h) {
    if (!h.hermitian_hint())
      throw ContractViolation("SpectralPropagator: generator must carry hermitian_hint");
    init(h.matrix());
  }

  // Unchecked entry point for generators assembled from Hermitian parts.
  static SpectralPropagator from_hermitian(const Dense& h) {
    SpectralPropagator p;
    p.init(h);
    return p;
  }

  const RealVector& eigenvalues() const { return values_; }
  bool diagonal() const { return diagonal_; }

  // exp(-i h t)
  Dense unitary(Real t) const {
    const CVector<Real> phases = phase_vector(t);
    if (diagonal_) return phases.asDiagonal();
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
  }

  CVector<Real> apply(const CVector<Real>& psi, Real t) const {
    const CVector<Real> phases = phase_vector(t);
    if (diagonal_) return phases.cwiseProduct(psi);
    return vectors_ * phases.cwiseProduct(vectors_.adjoint() * psi);
  }

 private:
  SpectralPropagator() = default;

  void init(const Dense& h) {
    diagonal_ = is_diagonal<Real>(h);
    if (diagonal_) {
      values_ = h.diagonal().real();
      return;
    }
    Eigen::SelfAdjointEigenSolver<Dense> es(h);
    if (es.info() != Eigen::Success)
      throw NumericalError("SpectralPropagator: eigendecomposition failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
  }

  CVector<Real> phase_vector(Real t) const {
    CVector<Real> phases(values_.size());
    for (Index k = 0; k < values_.size(); ++k)
      phases(k) = std::polar(Real(1), -values_(k) * t);
    return phases;
  }

  RealVector values_;
  Dense vectors_;
  bool diagonal_ = false;
};

// exp(-i * angle * J_axis)
template <typename Real = double>
BasicOperator<Real> rotation(const SpinSystem& sys, Axis axis, Real angle) {
  if (!std::isfinite(static_cast<double>(angle))) throw DomainError("rotation: angle must be finite");
  SpectralPropagator<Real> prop(axis_operator<Real>(sys, axis));
  return BasicOperator<Real>(prop.unitary(angle), false, true);
}

template <typename Real>
BasicState<Real> evolve_unitary(const BasicState<Real>& state, const BasicOperator<Real>& h,
                                Real t, const Tolerances& tol = {}) {
  if (!h.hermitian_hint()) throw ContractViolation("evolve_unitary: generator is not Hermitian");
  if (h.dim() != state.dim()) throw ContractViolation("evolve_unitary: dimension mismatch");
  if (t == Real(0)) return state;
  SpectralPropagator<Real> prop(h);
  BasicState<Real> out(prop.apply(state.coeffs(), t));
  if (std::abs(out.norm() - state.norm()) > tol.norm)
    throw NumericalError("evolve_unitary: norm not preserved");
  return out;
}

template <typename Real>
BasicState<Real> operator*(const BasicOperator<Real>& op, const BasicState<Real>& s) {
  if (op.dim() != s.dim()) throw ContractViolation("operator*: dimension mismatch");
  return BasicState<Real>(op.matrix() * s.coeffs());
}

template <typename Real>
BasicOperator<Real> operator*(const BasicOperator<Real>& a, const BasicOperator<Real>& b) {
  if (a.dim() != b.dim()) throw ContractViolation("operator*: dimension mismatch");
  Tolerances t;
  t.unitary = 1e-8;
  const bool unitary = a.unitary_hint() && b.unitary_hint();
  return BasicOperator<Real>(a.matrix() * b.matrix(), false, unitary, t);
}

template <typename Real>
Real expectation(const BasicState<Real>& s, const BasicOperator<Real>& op,
                 const Tolerances& tol = {}) {
  if (op.dim() != s.dim()) throw ContractViolation("expectation: dimension mismatch");
  const std::complex<Real> v = s.coeffs().dot(op.matrix() * s.coeffs());
  if (std::abs(v.imag()) > tol.imaginary)
    throw NumericalError("expectation: imaginary residue " + std::to_string(double(v.imag())));
  return v.real();
}

template <typename Real>
Real expectation(const BasicDensity<Real>& rho, const BasicOperator<Real>& op,
                 const Tolerances& tol = {}) {
  if (op.dim() != rho.dim()) throw ContractViolation("expectation: dimension mismatch");
  const std::complex<Real> v = (rho.matrix() * op.matrix()).trace();
  if (std::abs(v.imag()) > tol.imaginary)
    throw NumericalError("expectation: imaginary residue " + std::to_string(double(v.imag())));
  return v.real();
}

}  // namespace spdmbi
