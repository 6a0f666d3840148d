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

#include <numeric>

#include "helpers.hpp"
#include "spdmbi/errors.hpp"
#include "spdmbi/evolution.hpp"
#include "spdmbi/protocols.hpp"
#include "spdmbi/states.hpp"

using namespace spdmbi;
using testing::linspace;
using testing::max_diff;
using testing::pi;

namespace {

CMatrix<double> exp_hermitian(const CMatrix<double>& h, double t) {
  return SpectralPropagator<double>::from_hermitian(h).unitary(t);
}

CMatrix<double> op(const SpinSystem& sys, Component c) {
  return collective_operator(sys, c).matrix();
}

}  // namespace

TEST_CASE("schedule structure") {
  PulseSchedule s;
  CHECK(s.empty());
  const SpinSystem sys(5);
  const auto psi = spin_coherent(sys, 0.9, 0.2);
  CHECK(max_diff(evolve_schedule(psi, s), psi) == 0.0);

  s.free(0.5, 0.1, 0.2).impulse(Axis::X, pi / 2).drive(0.25, 0.0, 0.1, 2.0, Axis::Y);
  CHECK(s.segments().size() == 2);
  CHECK(s.impulses().size() == 1);
  CHECK(s.impulses()[0].position == 1);
  CHECK(s.total_duration() == doctest::Approx(0.75));

  CHECK_THROWS(PulseSchedule().add(Segment{-1.0, 0, 0, 0, std::nullopt}));
  CHECK_THROWS(PulseSchedule().add(Segment{1.0, 0, 0, 1.0, std::nullopt}));
}

TEST_CASE("schedule evolution matches segment products") {
  const SpinSystem sys(6);
  PulseSchedule s;
  s.free(0.7, 0.3, -0.4).impulse(Axis::Y, 1.1).drive(0.2, 0.1, 0.5, 3.0, Axis::X);
  CMatrix<double> expect = exp_hermitian(segment_hamiltonian(sys, s.segments()[1]).matrix(), 0.2) *
                           rotation(sys, Axis::Y, 1.1).matrix() *
                           exp_hermitian(segment_hamiltonian(sys, s.segments()[0]).matrix(), 0.7);
  CHECK(max_diff(schedule_unitary(sys, s).matrix(), expect) <= 1e-12);
}

TEST_CASE("readout compositions") {
  for (int n : {4, 8, 20}) {
    const SpinSystem sys(n);
    const double chi_r = 0.04 * pi;
    const double t_r = pi / (2 * chi_r);
    for (double delta : {-0.7, 0.0, 1.3}) {
      PulseSchedule reb;
      reb.impulse(Axis::X, pi / 2).free(t_r, chi_r, delta).impulse(Axis::X, -pi / 2);
      const CMatrix<double> gen_y = chi_r * op(sys, Component::Jy2) + delta * op(sys, Component::Jy);
      CHECK(max_diff(schedule_unitary(sys, reb).matrix(), exp_hermitian(gen_y, t_r)) <= 1e-10);

      PulseSchedule echo;
      echo.impulse(Axis::Y, pi / 2)
          .free(t_r / 2, chi_r, delta)
          .impulse(Axis::Y, -pi)
          .free(t_r / 2, chi_r, delta)
          .impulse(Axis::Y, pi / 2);
      const CMatrix<double> gen_x = chi_r * op(sys, Component::Jx2);
      CHECK(max_diff(schedule_unitary(sys, echo).matrix(), exp_hermitian(gen_x, t_r)) <= 1e-10);
    }
  }
}

TEST_CASE("twist about y conjugates Jz^2 into itself for even N") {
  for (int n : {2, 4, 8, 20}) {
    const SpinSystem sys(n);
    const CMatrix<double> u = exp_hermitian(op(sys, Component::Jy2), pi / 2);
    const CMatrix<double> jz2 = op(sys, Component::Jz2);
    CHECK(max_diff(u * jz2 * u.adjoint(), jz2) <= 1e-10);
  }
}

TEST_CASE("lindblad integration") {
  const SpinSystem sys(6);
  const auto psi = spin_coherent(sys, 1.1, 0.4);
  const auto rho0 = DensityMatrix::pure(psi);

  SUBCASE("closed system reproduces unitary evolution") {
    const OperatorMatrix h(0.3 * op(sys, Component::Jz2) + 0.8 * op(sys, Component::Jx), true);
    const auto rho = lindblad_evolve(rho0, h, NoiseModel{}, 1.5, 1e-3);
    const auto ref = DensityMatrix::pure(evolve_unitary(psi, h, 1.5));
    CHECK(max_diff(rho.matrix(), ref.matrix()) <= 1e-8);
  }
  SUBCASE("dephasing leaves populations alone under diagonal generators") {
    const OperatorMatrix h(0.3 * op(sys, Component::Jz2) + 0.5 * op(sys, Component::Jz), true);
    NoiseModel noise;
    noise.dephasing_rate = 0.2;
    const auto rho = lindblad_evolve(rho0, h, noise, 2.0, 1e-3);
    CHECK((rho.matrix().diagonal() - rho0.matrix().diagonal()).cwiseAbs().maxCoeff() <= 1e-12);
    rho.validate();
    // coherences decay as exp(-rate (m - m')^2 t / 2)
    const double expect = std::abs(rho0.matrix()(0, 1)) * std::exp(-0.2 * 2.0 / 2);
    CHECK(std::abs(rho.matrix()(0, 1)) == doctest::Approx(expect).epsilon(1e-9));
  }
  SUBCASE("step halving converges at fourth order") {
    const OperatorMatrix h(0.3 * op(sys, Component::Jz2) + 2.0 * op(sys, Component::Jx), true);
    NoiseModel noise;
    noise.dephasing_rate = 0.3;
    const auto fine = lindblad_evolve(rho0, h, noise, 1.0, 0.0025);
    const double e1 = max_diff(lindblad_evolve(rho0, h, noise, 1.0, 0.02).matrix(), fine.matrix());
    const double e2 = max_diff(lindblad_evolve(rho0, h, noise, 1.0, 0.01).matrix(), fine.matrix());
    CHECK(e2 < e1 / 10);
  }
  SUBCASE("unstable steps are reported") {
    const OperatorMatrix h(5.0 * op(sys, Component::Jz2) + 5.0 * op(sys, Component::Jx), true);
    CHECK_THROWS_AS(lindblad_evolve(rho0, h, NoiseModel{}, 4.0, 1.0), StepSizeError);
  }
}

TEST_CASE("dephasing during protocol II only lowers contrast") {
  DcProtocolParams p;
  p.protocol = DcProtocol::II;
  p.n_particles = 8;
  p.chi = 0.02 * pi;
  p.chi_r = 0.04 * pi;
  const auto cat = spin_cat(SpinSystem(8), pi / 8, nullptr);
  const auto deltas = linspace(-pi / 8, pi / 8, 9);

  auto peak = [&](double rate) {
    p.dephasing_rate = rate;
    double best = 0.0;
    for (double d : deltas) best = std::max(best, std::abs(dc_point(p, cat, d).jz));
    return best;
  };
  p.dephasing_rate = 0.01;
  CHECK(std::abs(dc_point(p, cat, 0.0).jz) <= 1e-8);
  CHECK(peak(0.01) < peak(0.0));
}

TEST_CASE("dissipator covariance") {
  const SpinSystem sys(6);
  NoiseModel noise;
  noise.dephasing_rate = 0.7;
  CHECK(dissipator_covariance_check(noise, sys, 10));
  CHECK_FALSE(dissipator_covariance_check(collective_operator(sys, Component::Jplus), 0.7, sys, 10,
                                          3));
  CHECK(dissipator_covariance_check(NoiseModel{}, sys, 3));
}

TEST_CASE("white noise trajectories") {
  NoiseModel noise;
  noise.white_noise_sigma = 0.0;
  const auto quiet = noise_trajectory(noise, 1.0, 0.01);
  CHECK(std::all_of(quiet.samples().begin(), quiet.samples().end(), [](double v) { return v == 0.0; }));

  noise.white_noise_sigma = 1.7;
  noise.seed = 42;
  const auto big = noise_trajectory(noise, 1.0, 1e-6);
  REQUIRE(big.samples().size() == 1000000);
  const auto& s = big.samples();
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / s.size();
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= s.size();
  CHECK(std::abs(mean) < 5e-3);
  CHECK(std::abs(var - 1.7 * 1.7) < 0.01 * 1.7 * 1.7);

  CHECK(noise_trajectory(noise, 0.5, 0.01).samples() == noise_trajectory(noise, 0.5, 0.01).samples());
  CHECK(noise_trajectory(noise, 0.5, 0.01, 1).samples() !=
        noise_trajectory(noise, 0.5, 0.01, 2).samples());

  const NoiseTrajectory steps(0.5, {1.0, -2.0, 4.0});
  CHECK(steps.at(0.75) == -2.0);
  CHECK(steps.integral(0.25, 1.25) == doctest::Approx(0.25 - 1.0 + 1.0));
}

TEST_CASE("noise enters as an extra detuning") {
  const SpinSystem sys(4);
  const auto psi = spin_coherent(sys, pi / 2, 0.0);
  PulseSchedule s;
  s.free(1.0, 0.1, 0.3);
  const NoiseTrajectory constant(0.25, {0.2, 0.2, 0.2, 0.2});
  PulseSchedule shifted;
  shifted.free(1.0, 0.1, 0.5);
  CHECK(max_diff(evolve_schedule(psi, s, constant), evolve_schedule(psi, shifted)) <= 1e-12);
}

TEST_CASE("antisymmetry of dc signals under imperfect pulses") {
  const auto deltas = linspace(-pi / 4, pi / 4, 21);
  for (auto protocol : {DcProtocol::I, DcProtocol::II}) {
    for (const StateSpec& spec : {StateSpec::scs(), StateSpec::cat(pi / 8), StateSpec::ghz()}) {
      DcProtocolParams p;
      p.protocol = protocol;
      p.n_particles = 10;
      p.chi = 0.04 * pi;
      p.chi_r = 0.04 * pi;
      p.rabi = 2 * pi;
      p.epsilon = 0.1;
      const auto input = make_state(SpinSystem(10), spec, nullptr);
      for (double d : deltas) {
        const double sum = dc_point(p, input, d).jz + dc_point(p, input, -d).jz;
        CHECK(std::abs(sum) <= 1e-9);
      }
    }
  }
  // ideal y-axis echo keeps the cat spectrum antisymmetric
  DcProtocolParams p;
  p.protocol = DcProtocol::III;
  p.n_particles = 10;
  p.chi = 0.04 * pi;
  p.chi_r = 0.04 * pi;
  const auto cat = spin_cat(SpinSystem(10), pi / 8, nullptr);
  for (double d : deltas)
    CHECK(std::abs(dc_point(p, cat, d).jz + dc_point(p, cat, -d).jz) <= 1e-9);
}
