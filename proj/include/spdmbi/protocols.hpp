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

#include <optional>
#include <span>
#include <vector>

#include "spdmbi/evolution.hpp"
#include "spdmbi/spectrum.hpp"
#include "spdmbi/states.hpp"

namespace spdmbi {

// ---------------------------------------------------------------- dc Ramsey

// I: linear pi/2 readout. II: twist readout about y built from free evolution
// between two pi/2-x pulses. III: twist about x built from a y-axis echo.
enum class DcProtocol { I, II, III };

struct DcProtocolParams {
  DcProtocol protocol = DcProtocol::I;
  int n_particles = 20;
  double chi = 0.0;     // interrogation nonlinearity
  double chi_r = 0.0;   // readout nonlinearity
  double T = 1.0;       // interrogation time
  std::optional<double> readout_time;  // default pi / (2 chi_r)
  std::optional<double> rabi;          // empty: ideal impulses
  double epsilon = 0.0;                // relative pulse-length error
  double dephasing_rate = 0.0;

  double t_r() const;
  bool ideal() const { return !rabi.has_value(); }
  void validate() const;
};

PulseSchedule build_dc_schedule(const DcProtocolParams& p, double delta);

// <Jz>, <Jz^2> after the protocol at one detuning. Uses the master equation
// when dephasing_rate > 0.
SpectrumRow dc_point(const DcProtocolParams& p, const StateVector& input, double delta);
SpectrumRow dc_point(const DcProtocolParams& p, const DensityMatrix& input, double delta);

SpectrumTable dc_spectrum(const DcProtocolParams& p, const StateSpec& state,
                          std::span<const double> deltas, std::size_t workers = 0);
SpectrumTable dc_spectrum(const DcProtocolParams& p, const StateVector& input,
                          std::span<const double> deltas, std::size_t workers = 0);

// ------------------------------------------------------- ac amplitude sensing

struct AcProtocolParams {
  int n_particles = 20;
  double b_ac = 1.0;
  double b_dc = 0.0;
  double omega_sig = 0.0;  // angular frequency of the ac field
  double gamma_g = 1.0;
  int n_cycles = 1;
  int n_max = 1;           // cycles averaged in the time-averaged signal
  double chi = 0.0;

  // Phase per cycle: (2 pi gamma / omega)(B_dc - 2 B_ac / pi).
  double phase() const;
  // t_n = 2 n pi / omega for the current n_cycles.
  double cycle_time() const;
  void validate() const;
};

enum class AcReadout { HalfPiX, TwistX };

// exp(-2i chi t_n Jz^2) exp(-i n phi Jz) exp(i pi Jx) |in>
StateVector ac_final_state(const AcProtocolParams& p, const StateVector& input);

// Time-domain oracle: [0, t_n] with pi-x impulses at j pi / omega
// (j = 1..2n-1), then [t_n, 2 t_n] free; field B_dc + B_ac sin(omega t)
// sampled at midpoints of steps 2 pi / (samples_per_period * omega).
StateVector ac_final_state_time_domain(const AcProtocolParams& p, const StateVector& input,
                                       int samples_per_period = 200);

StateVector apply_readout(const StateVector& state, AcReadout readout);

struct AcSignal {
  double jz_n = 0.0;    // signal after n_cycles
  double jz_avg = 0.0;  // (1/n_max) sum over n = 1..n_max
};

AcSignal ac_signal(const AcProtocolParams& p, const StateSpec& state, AcReadout readout);

// <Jz>, <Jz^2> after readout for the current n_cycles.
SpectrumRow ac_point(const AcProtocolParams& p, const StateVector& input, AcReadout readout);

AcReadout default_readout(const StateSpec& state);

// ----------------------------------------------------------------- lock-in

// Fourier coefficients of cos(alpha(t)) and sin(alpha(t)) for square pi
// pulses of width t_omega every tau_r; index k - 1 holds harmonic k.
struct FourierSeries {
  std::vector<double> a;
  std::vector<double> b;
};

FourierSeries fourier_coeffs(double t_omega, double tau_r, int k_max);

enum class LockinSequence { PDD, CPMG };
enum class LockinVariant { CpIdeal, PddIdeal, CpFiniteWidthX, CpFiniteWidthY };

struct LockinParams {
  LockinSequence sequence = LockinSequence::CPMG;
  Axis pulse_axis = Axis::Y;
  int pulses = 100;          // L
  double tau_r = 0.0;        // nominal spacing; grid sweeps override it
  double t_omega = 0.0;      // pulse width, 0 selects impulses
  double omega_s = 0.0;      // signal angular frequency
  double b_ac = 1.0;
  double gamma_g = 1.0;
  double chi = 0.0;
  NoiseModel noise;          // white_noise_sigma > 0 enables ensembles
  double noise_dt = 0.0;     // sample spacing, default tau_s / 20
  int magnus_substeps = 8;   // 4th-order Magnus steps per finite pulse

  double tau_s() const;           // pi / omega_s
  double offset() const;          // lambda: 1/2 for CPMG, 0 for PDD
  void validate() const;
};

// Signal after the full square-pulse sequence at spacing tau_r.
double lockin_signal_full(const LockinParams& p, const StateVector& input, double tau_r);
double lockin_signal_effective(const LockinParams& p, LockinVariant variant,
                               const StateVector& input, double tau_r);

// Sweeps (tau_r - tau_s)/tau_s over `relative_detunings`.
SpectrumTable lockin_full(const LockinParams& p, const StateVector& input,
                          std::span<const double> relative_detunings, std::size_t workers = 0);
SpectrumTable lockin_effective(const LockinParams& p, LockinVariant variant,
                               const StateVector& input,
                               std::span<const double> relative_detunings,
                               std::size_t workers = 0);

// Default grid: `points` values over |dtau/tau_s| <= 2 / L.
std::vector<double> lockin_default_grid(int pulses, int points = 2001);

// Drive factors multiplying 2 gamma B / pi at x = L omega_s dtau.
double cp_drive_factor(double x);       // sin^2(x/2) / (x/2)
double pdd_drive_factor(double x);      // sin(x) / x
double cp_drive_factor_alt(int pulses, double omega_s_dtau);  // sin^2(L y/2) / (L sin(y/2))

// CPMG phase model for entangled lock-in readout.
struct LockinPhaseModel {
  double gamma_g = 1.0;
  double b_ac = 1.0;
  double omega = 0.0;    // signal angular frequency
  double tau_m = 0.0;    // reference pulse spacing
  double offset = 0.5;   // lambda
};

// Exact integral of gamma B sin(omega t) cos(alpha(t)) over t_n = 2 n tau_m.
double lockin_accumulated_phase(const LockinPhaseModel& model, int n);

AcSignal lockin_entangled_signal(const StateSpec& state, int n_particles, double phi_l);
AcSignal lockin_entangled_signal(const StateSpec& state, int n_particles,
                                 const LockinPhaseModel& model, int n, int n_max);

// ------------------------------------------------------- state preparation

// exp(-i t_p (chi Jz^2 + delta Jz + omega_p Jy)) |J,J> with
// t_p = (1 + epsilon) pi / (2 omega_p); omega_p = inf gives the exact rotation.
StateVector imperfect_preparation(double omega_p, double epsilon, double chi, double delta,
                                  const SpinSystem& sys);

}  // namespace spdmbi
