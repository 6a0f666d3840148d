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


#include <doctest.h>

#include <complex>
#include <random>

#include "helpers.hpp"
#include "spdmbi/errors.hpp"
#include "spdmbi/spin_core.hpp"
#include "spdmbi/states.hpp"

using namespace spdmbi;
using testing::max_diff;
using testing::pi;

TEST_CASE("ladder coefficients") {
  CHECK(ladder_coefficient(10, 10, Ladder::Raise) == 0.0);
  CHECK(ladder_coefficient(0.5, -0.5, Ladder::Raise) == doctest::Approx(1.0));
  CHECK(ladder_coefficient(2, 0, Ladder::Raise) == doctest::Approx(std::sqrt(6.0)));
  CHECK(ladder_coefficient(2, -2, Ladder::Lower) == 0.0);
  CHECK_THROWS_AS(ladder_coefficient(1, 2, Ladder::Raise), DomainError);
}

TEST_CASE("collective operators") {
  const auto jz = collective_operator(SpinSystem(2), Component::Jz).matrix();
  CHECK(jz.diagonal().real()(0) == 1.0);
  CHECK(jz.diagonal().real()(2) == -1.0);
  CHECK(is_diagonal(jz));

  const auto jx = collective_operator(SpinSystem(1), Component::Jx).matrix();
  CHECK(std::abs(jx(0, 1) - 0.5) < 1e-15);
  CHECK(std::abs(jx(1, 0) - 0.5) < 1e-15);
  CHECK(std::abs(jx(0, 0)) < 1e-15);

  const SpinSystem sys(6);
  const auto x = collective_operator(sys, Component::Jx).matrix();
  CHECK(max_diff(collective_operator(sys, Component::Jx2).matrix(), x * x) == 0.0);
  CHECK(collective_operator(sys, Component::Jy2).hermitian_hint());
}

TEST_CASE("su(2) commutators for N = 1..10") {
  const std::complex<double> i(0, 1);
  for (int n = 1; n <= 10; ++n) {
    const SpinSystem sys(n);
    const auto x = collective_operator(sys, Component::Jx).matrix();
    const auto y = collective_operator(sys, Component::Jy).matrix();
    const auto z = collective_operator(sys, Component::Jz).matrix();
    CHECK(max_diff(x * y - y * x, i * z) <= 1e-12);
    CHECK(max_diff(y * z - z * y, i * x) <= 1e-12);
    CHECK(max_diff(z * x - x * z, i * y) <= 1e-12);
  }
}

TEST_CASE("hint validation") {
  CMatrix<double> m = CMatrix<double>::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(OperatorMatrix(m, true), ContractViolation);
  CHECK_THROWS_AS(OperatorMatrix(m, false, true), ContractViolation);
}

TEST_CASE("rotations") {
  SUBCASE("pi about x flips |1,1>") {
    const SpinSystem sys(2);
    const auto out = rotation(sys, Axis::X, pi) * StateVector::basis(3, 0);
    CHECK(std::abs(out[2] + 1.0) < 1e-12);
    CHECK(std::abs(out[0]) < 1e-12);
  }
  SUBCASE("zero angle is the identity") {
    const SpinSystem sys(5);
    CHECK(max_diff(rotation(sys, Axis::Z, 0.0).matrix(), OperatorMatrix::identity(6).matrix()) ==
          0.0);
  }
  SUBCASE("pi/2 about y of the top state is the coherent state") {
    const SpinSystem sys(20);
    const auto rotated = rotation(sys, Axis::Y, pi / 2) * StateVector::basis(sys.dim(), 0);
    CHECK(max_diff(rotated, spin_coherent(sys, pi / 2, 0.0)) <= 1e-12);
  }
  SUBCASE("exchange action for N <= 10") {
    for (int n = 1; n <= 10; ++n) {
      const SpinSystem sys(n);
      const auto ex_dag = rotation(sys, Axis::X, pi).adjoint();
      for (Index r = 0; r < sys.dim(); ++r) {
        const auto out = ex_dag * StateVector::basis(sys.dim(), r);
        const Index mirror = sys.row_of(-sys.m_at(r));
        CHECK(std::abs(out[mirror] - i_power(n)) <= 1e-12);
        CHECK(out.norm() == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("2 pi rotation is (-1)^N") {
    for (int n = 1; n <= 9; ++n) {
      const SpinSystem sys(n);
      const double sign = n % 2 == 0 ? 1.0 : -1.0;
      for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        const auto r = rotation(sys, axis, 2 * pi).matrix();
        CHECK(max_diff(r, sign * OperatorMatrix::identity(sys.dim()).matrix()) <= 1e-10);
      }
    }
  }
}

TEST_CASE("evolve_unitary") {
  const SpinSystem sys(7);
  const double delta = 0.37;
  const double t = 1.3;
  const OperatorMatrix h(delta * collective_operator(sys, Component::Jz).matrix(), true);

  SUBCASE("diagonal generator imprints phases") {
    for (Index r = 0; r < sys.dim(); ++r) {
      const auto out = evolve_unitary(StateVector::basis(sys.dim(), r), h, t);
      CHECK(std::abs(out[r] - std::polar(1.0, -delta * sys.m_at(r) * t)) < 1e-13);
    }
  }
  SUBCASE("composition and t = 0") {
    const OperatorMatrix twist(0.2 * collective_operator(sys, Component::Jz2).matrix() +
                                   0.9 * collective_operator(sys, Component::Jx).matrix(),
                               true);
    const auto psi = spin_coherent(sys, 0.7, 0.3);
    const auto once = evolve_unitary(psi, twist, 1.7);
    const auto twice = evolve_unitary(evolve_unitary(psi, twist, 0.5), twist, 1.2);
    CHECK(max_diff(once, twice) <= 1e-10);
    CHECK(max_diff(evolve_unitary(psi, twist, 0.0), psi) == 0.0);
    CHECK(std::abs(once.norm() - 1.0) <= 1e-10);
  }
  SUBCASE("non-Hermitian generator is rejected") {
    const OperatorMatrix up = collective_operator(sys, Component::Jplus);
    CHECK_THROWS_AS(evolve_unitary(StateVector::basis(sys.dim(), 0), up, 1.0), ContractViolation);
  }
}

TEST_CASE("expectations") {
  const int n = 12;
  const SpinSystem sys(n);
  const auto jz = collective_operator(sys, Component::Jz);
  const auto jz2 = collective_operator(sys, Component::Jz2);
  const auto scs = spin_coherent(sys, pi / 2, 0.0);
  CHECK(std::abs(expectation(scs, jz)) < 1e-12);
  CHECK(expectation(scs, jz2) == doctest::Approx(n / 4.0));
  CHECK(expectation(ghz(sys), jz2) == doctest::Approx(n * n / 4.0));
  CHECK(expectation(DensityMatrix::pure(scs), jz2) == doctest::Approx(n / 4.0));

  const OperatorMatrix raise = collective_operator(sys, Component::Jplus);
  CHECK_THROWS_AS(expectation(spin_coherent(sys, 1.0, 0.5), raise), NumericalError);
}
