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

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "spdmbi/spin_core.hpp"

namespace spdmbi {

// Piecewise-constant generator chi*Jz^2 + delta*Jz + rabi*J_axis.
struct Segment {
  double duration = 0.0;
  double chi = 0.0;
  double delta = 0.0;
  double rabi = 0.0;
  std::optional<Axis> axis;  // empty: free evolution, rabi must be 0
};

// exp(-i*angle*J_axis) applied before segment `position`.
struct InstantRotation {
  std::size_t position = 0;
  Axis axis = Axis::X;
  double angle = 0.0;
};

class PulseSchedule {
 public:
  PulseSchedule& add(const Segment& seg);
  PulseSchedule& free(double duration, double chi, double delta);
  PulseSchedule& drive(double duration, double chi, double delta, double rabi, Axis axis);
  // Impulse at the current end of the schedule.
  PulseSchedule& impulse(Axis axis, double angle);

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<InstantRotation>& impulses() const { return impulses_; }
  double total_duration() const;
  bool empty() const { return segments_.empty() && impulses_.empty(); }

 private:
  std::vector<Segment> segments_;
  std::vector<InstantRotation> impulses_;
};

struct NoiseModel {
  double dephasing_rate = 0.0;      // collective Jz dephasing
  double white_noise_sigma = 0.0;   // amplitude of the piecewise-constant Jz noise
  std::uint64_t seed = 0;
  int ensemble_size = 200;

  void validate() const;
};

OperatorMatrix segment_hamiltonian(const SpinSystem& sys, const Segment& seg);

StateVector evolve_schedule(const StateVector& state, const PulseSchedule& sched);

// Composed propagator of the whole schedule.
OperatorMatrix schedule_unitary(const SpinSystem& sys, const PulseSchedule& sched);

// Fixed-step RK4 of drho/dt = -i[h, rho] + rate*(Jz rho Jz - {Jz^2, rho}/2).
// The step is t / ceil(t / dt).
DensityMatrix lindblad_evolve(const DensityMatrix& rho, const OperatorMatrix& h,
                              const NoiseModel& noise, double t, double dt,
                              const Tolerances& tol = {});

// Step satisfying ||H|| dt <= 0.05 for this segment and dephasing rate.
double stable_lindblad_step(const SpinSystem& sys, const Segment& seg, double dephasing_rate);

// Segment-wise lindblad_evolve with stable steps (capped by max_dt);
// impulses act as U rho U^dagger.
DensityMatrix evolve_schedule(const DensityMatrix& rho, const PulseSchedule& sched,
                              const NoiseModel& noise,
                              double max_dt = std::numeric_limits<double>::infinity());

// Checks U_ex^dagger D[L](rho) U_ex = D[L](U_ex^dagger rho U_ex) on random rho.
bool dissipator_covariance_check(const OperatorMatrix& jump, double rate, const SpinSystem& sys,
                                 int trials, std::uint64_t seed, double tol = 1e-10);
bool dissipator_covariance_check(const NoiseModel& noise, const SpinSystem& sys, int trials);

// Piecewise-constant white noise sigma * g_k, g_k ~ Normal(0, 1).
class NoiseTrajectory {
 public:
  NoiseTrajectory(double dt, std::vector<double> samples)
      : dt_(dt), samples_(std::move(samples)) {}

  double dt() const { return dt_; }
  const std::vector<double>& samples() const { return samples_; }
  double duration() const { return dt_ * static_cast<double>(samples_.size()); }
  double at(double t) const;
  // Exact integral of the piecewise-constant samples over [a, b].
  double integral(double a, double b) const;

 private:
  double dt_;
  std::vector<double> samples_;
};

NoiseTrajectory noise_trajectory(const NoiseModel& noise, double duration, double dt);
// Trajectory `index` of an ensemble: seeded with noise.seed XOR index.
NoiseTrajectory noise_trajectory(const NoiseModel& noise, double duration, double dt,
                                 std::uint64_t index);

// Pure-state evolution with the trajectory added as an extra delta-like Jz
// term; segments are split at sample boundaries.
StateVector evolve_schedule(const StateVector& state, const PulseSchedule& sched,
                            const NoiseTrajectory& noise);

}  // namespace spdmbi
