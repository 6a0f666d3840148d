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

#include <functional>
#include <span>
#include <vector>

#include "spdmbi/protocols.hpp"
#include "spdmbi/spectrum.hpp"
#include "spdmbi/states.hpp"

namespace spdmbi {

struct Moments {
  double jz = 0.0;
  double jz2 = 0.0;
};

// sqrt(2) * c_m of the exactly normalized cat state, m = -J..J at index m + J.
// Symmetric in m; requires even N.
class CatAmplitudes {
 public:
  CatAmplitudes(int n_particles, double theta);

  int j() const { return j_; }
  // 0 outside [-J, J].
  double operator()(int m) const;

 private:
  int j_;
  std::vector<double> values_;
};

// Protocol I, coherent state along x, ideal pulses.
double jz_scs_closed(int n_particles, double chi, double delta, double T);
double jz2_scs_closed(int n_particles, double chi, double delta, double T);

// Protocol II, ideal pulses, readout twist chi_r t_r = pi/2 (so chi_r is
// implied by t_r).
Moments cat_closed_II(int n_particles, double theta, double chi, double delta, double T,
                      double t_r);

// Protocol III, ideal pulses; independent of chi.
Moments cat_closed_III(int n_particles, double theta, double delta, double T);

// 4 T^2 gamma^2 Var(Jz)
double qfi_variance(const StateVector& state, double T, double gamma_g);

// 4(<dPsi|dPsi> - |<dPsi|Psi>|^2) by central differences of `family` at `at`.
double qfi_derivative(const std::function<StateVector(double)>& family, double at, double h);
// Family exp(-i gamma B T Jz)|state>, derivative at B = 0.
double qfi_derivative(const StateVector& state, double T, double gamma_g, double h);

double qcrb(double f_q, int nu = 1);

struct PropagatedPrecision {
  double precision = 0.0;
  double slope = 0.0;     // d<Jz>/d(param)
  double stddev = 0.0;    // sqrt(<Jz^2> - <Jz>^2) at the point
  double stencil = 0.0;   // central-difference half width
};

// Delta B = stddev / (gamma |slope|) with slope from rows at `at` +- h.
PropagatedPrecision precision_error_prop(const SpectrumTable& spectrum, double at, double gamma_g,
                                         double stencil_h);
PropagatedPrecision precision_error_prop(const std::function<SpectrumRow(double)>& evaluate,
                                         double at, double gamma_g, double stencil_h);

double precision_scs_closed(int n_particles, double chi, double delta, double T, double gamma_g);
// sqrt(sum m^2 a_m^2 - <Jz>^2) / |sum 2 m^2 a_m^2 cos(2 m phase)|
double cat_precision_factor(int n_particles, double theta, double phase);
double precision_cat_closed(int n_particles, double theta, double delta, double T,
                            double gamma_g);
double precision_ac_closed(const StateSpec& state, int n_particles, int n, double phi,
                           double omega, double gamma_g, double chi = 0.0);

// Closed-form ac signal after n cycles and its average over n = 1..n_max.
AcSignal ac_closed_signals(const StateSpec& state, int n_particles, int n, int n_max, double phi,
                           double chi, double omega);

enum class PrecisionMethod { ErrorProp, ClosedForm, Qfi };

struct PrecisionPoint {
  int n_particles = 0;
  double delta_or_phi = 0.0;
  double precision = 0.0;
  double qcrb = 0.0;
  PrecisionMethod method = PrecisionMethod::ErrorProp;
};

struct ScalingResult {
  std::vector<PrecisionPoint> points;
  double exponent = 0.0;       // slope of log precision vs log N
  double log_prefactor = 0.0;  // intercept
};

// Least-squares slope and intercept of log(y) against log(x).
std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y);

// Error-propagation precision at delta = 0 for each N (n_particles of `base`
// is overridden); needs at least 5 values of N.
ScalingResult scaling_scan(const StateSpec& state, const DcProtocolParams& base,
                           std::span<const int> ns, double gamma_g, double stencil_h = 1e-4,
                           std::size_t workers = 0);

}  // namespace spdmbi
