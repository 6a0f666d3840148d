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

#include "spdmbi/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "spdmbi/detail/rotation_cache.hpp"

namespace spdmbi {

using Dense = CMatrix<double>;
using Complex = std::complex<double>;

PulseSchedule& PulseSchedule::add(const Segment& seg) {
  if (!(seg.duration >= 0.0) || !std::isfinite(seg.duration))
    throw DomainError("PulseSchedule: segment duration must be finite and >= 0");
  if (!seg.axis && seg.rabi != 0.0)
    throw DomainError("PulseSchedule: free segment with nonzero rabi");
  segments_.push_back(seg);
  return *this;
}

PulseSchedule& PulseSchedule::free(double duration, double chi, double delta) {
  return add(Segment{duration, chi, delta, 0.0, std::nullopt});
}

PulseSchedule& PulseSchedule::drive(double duration, double chi, double delta, double rabi,
                                    Axis axis) {
  return add(Segment{duration, chi, delta, rabi, axis});
}

PulseSchedule& PulseSchedule::impulse(Axis axis, double angle) {
  if (!std::isfinite(angle)) throw DomainError("PulseSchedule: impulse angle must be finite");
  impulses_.push_back({segments_.size(), axis, angle});
  return *this;
}

double PulseSchedule::total_duration() const {
  double total = 0.0;
  for (const auto& s : segments_) total += s.duration;
  return total;
}

void NoiseModel::validate() const {
  if (dephasing_rate < 0 || white_noise_sigma < 0)
    throw DomainError("NoiseModel: rates must be >= 0");
  if (ensemble_size < 1) throw DomainError("NoiseModel: ensemble_size must be >= 1");
}

namespace {

Dense segment_matrix(const SpinSystem& sys, const Segment& seg, double extra_delta = 0.0) {
  const Index d = sys.dim();
  Dense h = Dense::Zero(d, d);
  for (Index r = 0; r < d; ++r) {
    const double m = sys.m_at(r);
    h(r, r) = seg.chi * m * m + (seg.delta + extra_delta) * m;
  }
  if (seg.axis && seg.rabi != 0.0)
    h += seg.rabi * detail::axis_generator(sys, *seg.axis);
  return h;
}

template <typename Apply>
void walk_schedule(const PulseSchedule& sched, Apply&& apply_segment,
                   const std::function<void(const InstantRotation&)>& apply_impulse) {
  const auto& segs = sched.segments();
  const auto& kicks = sched.impulses();
  std::size_t next_kick = 0;
  for (std::size_t i = 0; i <= segs.size(); ++i) {
    while (next_kick < kicks.size() && kicks[next_kick].position == i)
      apply_impulse(kicks[next_kick++]);
    if (i < segs.size()) apply_segment(segs[i]);
  }
}

}  // namespace

OperatorMatrix segment_hamiltonian(const SpinSystem& sys, const Segment& seg) {
  return OperatorMatrix(segment_matrix(sys, seg), true);
}

StateVector evolve_schedule(const StateVector& state, const PulseSchedule& sched) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  CVector<double> psi = state.coeffs();
  walk_schedule(
      sched,
      [&](const Segment& seg) {
        if (seg.duration == 0.0) return;
        psi = SpectralPropagator<double>::from_hermitian(segment_matrix(sys, seg))
                  .apply(psi, seg.duration);
      },
      [&](const InstantRotation& kick) {
        psi = detail::axis_spectrum(sys, kick.axis).apply(psi, kick.angle);
      });
  StateVector out(std::move(psi));
  if (std::abs(out.norm() - state.norm()) > Tolerances{}.norm)
    throw NumericalError("evolve_schedule: norm not preserved");
  return out;
}

OperatorMatrix schedule_unitary(const SpinSystem& sys, const PulseSchedule& sched) {
  Dense u = Dense::Identity(sys.dim(), sys.dim());
  walk_schedule(
      sched,
      [&](const Segment& seg) {
        if (seg.duration == 0.0) return;
        u = SpectralPropagator<double>::from_hermitian(segment_matrix(sys, seg))
                .unitary(seg.duration) *
            u;
      },
      [&](const InstantRotation& kick) {
        u = detail::axis_spectrum(sys, kick.axis).unitary(kick.angle) * u;
      });
  return OperatorMatrix(std::move(u), false, true);
}

namespace {

// -i[h, rho] - (rate/2)(m_r - m_c)^2 rho_rc
Dense lindblad_rhs(const Dense& h, const Dense& rho, const Eigen::MatrixXd& dephase) {
  Dense out = Complex(0, -1) * (h * rho - rho * h);
  out.array() -= dephase.array().cast<Complex>() * rho.array();
  return out;
}

}  // namespace

DensityMatrix lindblad_evolve(const DensityMatrix& rho, const OperatorMatrix& h,
                              const NoiseModel& noise, double t, double dt,
                              const Tolerances& tol) {
  noise.validate();
  if (!h.hermitian_hint()) throw ContractViolation("lindblad_evolve: generator is not Hermitian");
  if (h.dim() != rho.dim()) throw ContractViolation("lindblad_evolve: dimension mismatch");
  if (t < 0 || !(dt > 0)) throw DomainError("lindblad_evolve: need t >= 0 and dt > 0");
  if (t == 0.0) return rho;

  const SpinSystem sys = SpinSystem::from_dim(rho.dim());
  const Index d = sys.dim();
  Eigen::MatrixXd dephase(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) {
      const double gap = sys.m_at(r) - sys.m_at(c);
      dephase(r, c) = 0.5 * noise.dephasing_rate * gap * gap;
    }

  const auto steps = static_cast<long>(std::ceil(t / dt - 1e-9));
  const double step = t / static_cast<double>(std::max(steps, 1L));
  const Dense& hm = h.matrix();
  Dense state = rho.matrix();
  for (long k = 0; k < std::max(steps, 1L); ++k) {
    const Dense k1 = lindblad_rhs(hm, state, dephase);
    const Dense k2 = lindblad_rhs(hm, state + 0.5 * step * k1, dephase);
    const Dense k3 = lindblad_rhs(hm, state + 0.5 * step * k2, dephase);
    const Dense k4 = lindblad_rhs(hm, state + step * k3, dephase);
    state += (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  DensityMatrix out(std::move(state));
  if (out.min_eigenvalue() < -1e-6)
    throw StepSizeError("lindblad_evolve: positivity lost, reduce dt");
  Tolerances relaxed = tol;
  relaxed.density_min_eigenvalue = -1e-6;
  out.validate(relaxed);
  return out;
}

double stable_lindblad_step(const SpinSystem& sys, const Segment& seg, double dephasing_rate) {
  const double n = sys.n_particles();
  const double norm_estimate = std::abs(seg.chi) * n * n / 4 + std::abs(seg.delta) * n / 2 +
                               std::abs(seg.rabi) * n / 2 + dephasing_rate * n * n / 2;
  return norm_estimate > 0 ? 0.05 / norm_estimate : std::numeric_limits<double>::infinity();
}

DensityMatrix evolve_schedule(const DensityMatrix& rho, const PulseSchedule& sched,
                              const NoiseModel& noise, double max_dt) {
  const SpinSystem sys = SpinSystem::from_dim(rho.dim());
  DensityMatrix current = rho;
  walk_schedule(
      sched,
      [&](const Segment& seg) {
        if (seg.duration == 0.0) return;
        const double dt = std::min({max_dt, stable_lindblad_step(sys, seg, noise.dephasing_rate),
                                    seg.duration});
        current = lindblad_evolve(current, segment_hamiltonian(sys, seg), noise, seg.duration, dt);
      },
      [&](const InstantRotation& kick) {
        const Dense u = detail::axis_spectrum(sys, kick.axis).unitary(kick.angle);
        current = DensityMatrix(u * current.matrix() * u.adjoint());
      });
  return current;
}

namespace {

Dense dissipator(const Dense& jump, double rate, const Dense& rho) {
  const Dense jdj = jump.adjoint() * jump;
  return rate * (jump * rho * jump.adjoint() - 0.5 * (jdj * rho + rho * jdj));
}

Dense random_density(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Dense a(d, d);
  for (Index c = 0; c < d; ++c)
    for (Index r = 0; r < d; ++r) a(r, c) = Complex(g(rng), g(rng));
  Dense rho = a * a.adjoint();
  return rho / rho.trace();
}

}  // namespace

bool dissipator_covariance_check(const OperatorMatrix& jump, double rate, const SpinSystem& sys,
                                 int trials, std::uint64_t seed, double tol) {
  if (trials < 1) throw DomainError("dissipator_covariance_check: trials must be >= 1");
  if (jump.dim() != sys.dim()) throw ContractViolation("dissipator_covariance_check: dim mismatch");
  if (rate == 0.0) return true;
  const Dense u = rotation(sys, Axis::X, std::numbers::pi).matrix();
  const Dense ud = u.adjoint();
  std::mt19937_64 rng(seed);
  for (int k = 0; k < trials; ++k) {
    const Dense rho = random_density(sys.dim(), rng);
    const Dense lhs = ud * dissipator(jump.matrix(), rate, rho) * u;
    const Dense rhs = dissipator(jump.matrix(), rate, ud * rho * u);
    if (max_abs<double>(lhs - rhs) > tol) return false;
  }
  return true;
}

bool dissipator_covariance_check(const NoiseModel& noise, const SpinSystem& sys, int trials) {
  noise.validate();
  return dissipator_covariance_check(collective_operator(sys, Component::Jz), noise.dephasing_rate,
                                     sys, trials, noise.seed);
}

double NoiseTrajectory::at(double t) const {
  if (samples_.empty() || t < 0) return 0.0;
  const auto k = static_cast<std::size_t>(t / dt_);
  return samples_[std::min(k, samples_.size() - 1)];
}

double NoiseTrajectory::integral(double a, double b) const {
  if (samples_.empty() || b <= a) return 0.0;
  double total = 0.0;
  double t = std::max(a, 0.0);
  while (t < b) {
    const auto k = std::min(static_cast<std::size_t>(t / dt_), samples_.size() - 1);
    const double edge = k + 1 == samples_.size() ? b : std::min(b, (k + 1) * dt_);
    total += samples_[k] * (edge - t);
    if (edge <= t) break;
    t = edge;
  }
  return total;
}

NoiseTrajectory noise_trajectory(const NoiseModel& noise, double duration, double dt,
                                 std::uint64_t index) {
  noise.validate();
  if (!(dt > 0)) throw DomainError("noise_trajectory: dt must be > 0");
  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(duration / dt - 1e-9)));
  std::vector<double> samples(count, 0.0);
  if (noise.white_noise_sigma > 0) {
    std::mt19937_64 rng(noise.seed ^ index);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& s : samples) s = noise.white_noise_sigma * g(rng);
  }
  return NoiseTrajectory(dt, std::move(samples));
}

NoiseTrajectory noise_trajectory(const NoiseModel& noise, double duration, double dt) {
  return noise_trajectory(noise, duration, dt, 0);
}

StateVector evolve_schedule(const StateVector& state, const PulseSchedule& sched,
                            const NoiseTrajectory& noise) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  CVector<double> psi = state.coeffs();
  double clock = 0.0;
  const double dt = noise.dt();
  walk_schedule(
      sched,
      [&](const Segment& seg) {
        const double end = clock + seg.duration;
        while (clock < end - 1e-15) {
          const auto k = static_cast<std::size_t>(std::floor(clock / dt + 1e-12));
          const double boundary = std::min(end, static_cast<double>(k + 1) * dt);
          const double piece = boundary - clock;
          if (piece > 0) {
            psi = SpectralPropagator<double>::from_hermitian(
                      segment_matrix(sys, seg, noise.at(clock + 0.5 * piece)))
                      .apply(psi, piece);
          }
          clock = boundary;
        }
        clock = end;
      },
      [&](const InstantRotation& kick) {
        psi = detail::axis_spectrum(sys, kick.axis).apply(psi, kick.angle);
      });
  return StateVector(std::move(psi));
}

}  // namespace spdmbi
