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

#include "spdmbi/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spdmbi/analytics.hpp"
#include "spdmbi/detail/rotation_cache.hpp"
#include "spdmbi/parallel.hpp"

namespace spdmbi {

namespace {

constexpr double kPi = std::numbers::pi;
using Dense = CMatrix<double>;
using Complex = std::complex<double>;

Moments diagonal_moments(const SpinSystem& sys, const CVector<double>& psi) {
  Moments out;
  for (Index r = 0; r < sys.dim(); ++r) {
    const double m = sys.m_at(r);
    const double p = std::norm(psi(r));
    out.jz += m * p;
    out.jz2 += m * m * p;
  }
  return out;
}

Moments diagonal_moments(const SpinSystem& sys, const Dense& rho) {
  Moments out;
  for (Index r = 0; r < sys.dim(); ++r) {
    const double m = sys.m_at(r);
    const double p = rho(r, r).real();
    out.jz += m * p;
    out.jz2 += m * m * p;
  }
  return out;
}

// exp(-i phase_m) on each Dicke component.
template <typename Phase>
CVector<double> apply_diagonal(const SpinSystem& sys, const CVector<double>& psi, Phase&& phase) {
  CVector<double> out(psi.size());
  for (Index r = 0; r < sys.dim(); ++r) out(r) = std::polar(1.0, -phase(sys.m_at(r))) * psi(r);
  return out;
}

}  // namespace

// ------------------------------------------------------------------- dc

double DcProtocolParams::t_r() const {
  if (readout_time) return *readout_time;
  return chi_r > 0 ? kPi / (2 * chi_r) : 0.0;
}

void DcProtocolParams::validate() const {
  if (n_particles < 1) throw DomainError("DcProtocolParams: n_particles must be >= 1");
  if (!(T > 0)) throw DomainError("DcProtocolParams: T must be > 0");
  if (protocol != DcProtocol::I && !(chi_r > 0))
    throw DomainError("DcProtocolParams: chi_r must be > 0 for protocols II and III");
  if (rabi && !(*rabi > 0)) throw DomainError("DcProtocolParams: rabi must be > 0");
  if (readout_time && !(*readout_time >= 0))
    throw DomainError("DcProtocolParams: readout_time must be >= 0");
  if (!(epsilon > -1)) throw DomainError("DcProtocolParams: epsilon must be > -1");
  if (dephasing_rate < 0) throw DomainError("DcProtocolParams: dephasing_rate must be >= 0");
}

PulseSchedule build_dc_schedule(const DcProtocolParams& p, double delta) {
  p.validate();
  PulseSchedule s;
  s.free(p.T, p.chi, delta);

  // Finite pulses keep the readout nonlinearity and the detuning switched on.
  auto pulse = [&](Axis axis, double sign, double angle, double chi_on) {
    const double scaled = (1 + p.epsilon) * angle;
    if (p.ideal())
      s.impulse(axis, sign * scaled);
    else
      s.drive(scaled / *p.rabi, chi_on, delta, sign * *p.rabi, axis);
  };

  const double tr = p.t_r();
  switch (p.protocol) {
    case DcProtocol::I:
      pulse(Axis::X, +1, kPi / 2, p.chi);
      break;
    case DcProtocol::II:
      pulse(Axis::X, +1, kPi / 2, p.chi_r);
      s.free(tr, p.chi_r, delta);
      pulse(Axis::X, -1, kPi / 2, p.chi_r);
      break;
    case DcProtocol::III:
      pulse(Axis::Y, +1, kPi / 2, p.chi_r);
      s.free(tr / 2, p.chi_r, delta);
      pulse(Axis::Y, -1, kPi, p.chi_r);
      s.free(tr / 2, p.chi_r, delta);
      pulse(Axis::Y, +1, kPi / 2, p.chi_r);
      break;
  }
  return s;
}

SpectrumRow dc_point(const DcProtocolParams& p, const StateVector& input, double delta) {
  const SpinSystem sys(p.n_particles);
  if (input.dim() != sys.dim()) throw ContractViolation("dc_point: dimension mismatch");
  if (p.dephasing_rate > 0) return dc_point(p, DensityMatrix::pure(input), delta);
  const StateVector out = evolve_schedule(input, build_dc_schedule(p, delta));
  const Moments mo = diagonal_moments(sys, out.coeffs());
  return {delta, mo.jz, mo.jz2};
}

SpectrumRow dc_point(const DcProtocolParams& p, const DensityMatrix& input, double delta) {
  const SpinSystem sys(p.n_particles);
  if (input.dim() != sys.dim()) throw ContractViolation("dc_point: dimension mismatch");
  NoiseModel noise;
  noise.dephasing_rate = p.dephasing_rate;
  const DensityMatrix out = evolve_schedule(input, build_dc_schedule(p, delta), noise);
  const Moments mo = diagonal_moments(sys, out.matrix());
  return {delta, mo.jz, mo.jz2};
}

SpectrumTable dc_spectrum(const DcProtocolParams& p, const StateVector& input,
                          std::span<const double> deltas, std::size_t workers) {
  if (deltas.empty()) throw DomainError("dc_spectrum: empty detuning grid");
  p.validate();
  SpectrumTable table;
  table.rows = parallel_map(
      deltas.size(), [&](std::size_t i) { return dc_point(p, input, deltas[i]); }, workers);
  return table;
}

SpectrumTable dc_spectrum(const DcProtocolParams& p, const StateSpec& state,
                          std::span<const double> deltas, std::size_t workers) {
  p.validate();
  return dc_spectrum(p, make_state(SpinSystem(p.n_particles), state), deltas, workers);
}

// ------------------------------------------------------------------- ac

double AcProtocolParams::phase() const {
  return 2 * kPi * gamma_g / omega_sig * (b_dc - 2 * b_ac / kPi);
}

double AcProtocolParams::cycle_time() const { return 2 * n_cycles * kPi / omega_sig; }

void AcProtocolParams::validate() const {
  if (n_particles < 1) throw DomainError("AcProtocolParams: n_particles must be >= 1");
  if (!(omega_sig > 0)) throw DomainError("AcProtocolParams: omega must be > 0");
  if (n_cycles < 1) throw DomainError("AcProtocolParams: n_cycles must be >= 1");
  if (n_max < 1) throw DomainError("AcProtocolParams: n_max must be >= 1");
}

StateVector ac_final_state(const AcProtocolParams& p, const StateVector& input) {
  p.validate();
  const SpinSystem sys(p.n_particles);
  if (input.dim() != sys.dim()) throw ContractViolation("ac_final_state: dimension mismatch");
  const CVector<double> flipped = detail::axis_spectrum(sys, Axis::X).apply(input.coeffs(), -kPi);
  const double twist = 2 * p.chi * p.cycle_time();
  const double shift = p.n_cycles * p.phase();
  return StateVector(
      apply_diagonal(sys, flipped, [&](double m) { return twist * m * m + shift * m; }));
}

StateVector ac_final_state_time_domain(const AcProtocolParams& p, const StateVector& input,
                                       int samples_per_period) {
  p.validate();
  if (samples_per_period < 2 || samples_per_period % 2 != 0)
    throw DomainError("ac_final_state_time_domain: samples_per_period must be even and >= 2");
  const SpinSystem sys(p.n_particles);
  if (input.dim() != sys.dim()) throw ContractViolation("ac_final_state_time_domain: dim mismatch");

  const double w = p.omega_sig;
  const double dt = 2 * kPi / (samples_per_period * w);
  const int per_half = samples_per_period / 2;
  const int halves = 2 * p.n_cycles;

  // Between impulses the generator is diagonal, so phases just accumulate.
  double chi_time = 0.0;
  double field_phase = 0.0;
  double t = 0.0;
  CVector<double> psi = input.coeffs();
  auto flush = [&] {
    psi = apply_diagonal(sys, psi, [&](double m) { return p.chi * chi_time * m * m + field_phase * m; });
    chi_time = 0.0;
    field_phase = 0.0;
  };
  auto step = [&] {
    const double mid = t + 0.5 * dt;
    field_phase += p.gamma_g * (p.b_dc + p.b_ac * std::sin(w * mid)) * dt;
    chi_time += dt;
    t += dt;
  };

  for (int half = 1; half <= halves; ++half) {
    for (int k = 0; k < per_half; ++k) step();
    if (half < halves) {
      flush();
      psi = detail::axis_spectrum(sys, Axis::X).apply(psi, kPi);
    }
  }
  for (int k = 0; k < halves * per_half; ++k) step();
  flush();
  return StateVector(std::move(psi));
}

StateVector apply_readout(const StateVector& state, AcReadout readout) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  if (readout == AcReadout::HalfPiX)
    return StateVector(detail::axis_spectrum(sys, Axis::X).apply(state.coeffs(), kPi / 2));
  return StateVector(detail::twist_x_spectrum(sys).apply(state.coeffs(), kPi / 2));
}

AcReadout default_readout(const StateSpec& state) {
  return state.kind == StateSpec::Kind::Scs ? AcReadout::HalfPiX : AcReadout::TwistX;
}

SpectrumRow ac_point(const AcProtocolParams& p, const StateVector& input, AcReadout readout) {
  const StateVector out = apply_readout(ac_final_state(p, input), readout);
  const Moments mo = diagonal_moments(SpinSystem(p.n_particles), out.coeffs());
  return {p.phase(), mo.jz, mo.jz2};
}

AcSignal ac_signal(const AcProtocolParams& p, const StateSpec& state, AcReadout readout) {
  p.validate();
  if (readout != default_readout(state))
    throw ContractViolation("ac_signal: coherent states read out with HalfPiX, cat/GHZ with TwistX");
  const StateVector input = make_state(SpinSystem(p.n_particles), state);
  AcSignal out;
  out.jz_n = ac_point(p, input, readout).jz;
  AcProtocolParams q = p;
  double sum = 0.0;
  for (int n = 1; n <= p.n_max; ++n) {
    q.n_cycles = n;
    sum += ac_point(q, input, readout).jz;
  }
  out.jz_avg = sum / p.n_max;
  return out;
}

// -------------------------------------------------------------- lock-in

FourierSeries fourier_coeffs(double t_omega, double tau_r, int k_max) {
  if (!(tau_r > 0) || !(t_omega >= 0) || !(t_omega < tau_r))
    throw DomainError("fourier_coeffs: need 0 <= t_omega < tau_r");
  if (k_max < 1) throw DomainError("fourier_coeffs: k_max must be >= 1");
  FourierSeries out;
  out.a.assign(k_max, 0.0);
  out.b.assign(k_max, 0.0);
  for (int k = 1; k <= k_max; k += 2) {
    const double u = k * t_omega / tau_r;
    double second = 0.0;
    if (std::abs(u - 1) < 1e-9)
      second = -(kPi / 4) * std::sin((k + 2) * kPi / 2);  // removable singularity
    else if (u > 0)
      second = std::cos((k + 1) * kPi / 2 + k * kPi * t_omega / (2 * tau_r)) / (1 - 1 / (u * u));
    const double ak = 4.0 / (k * kPi) * (std::sin(k * kPi / 2 - k * kPi * t_omega / (2 * tau_r)) + second);
    out.a[k - 1] = ak;
    out.b[k - 1] = u * ak;
  }
  return out;
}

double LockinParams::tau_s() const { return kPi / omega_s; }

double LockinParams::offset() const { return sequence == LockinSequence::CPMG ? 0.5 : 0.0; }

void LockinParams::validate() const {
  if (pulses < 1) throw DomainError("LockinParams: L must be >= 1");
  if (!(omega_s > 0)) throw DomainError("LockinParams: omega_s must be > 0");
  if (!(t_omega >= 0)) throw DomainError("LockinParams: t_omega must be >= 0");
  if (tau_r > 0 && !(t_omega < tau_r)) throw DomainError("LockinParams: need t_omega < tau_r");
  if (magnus_substeps < 1) throw DomainError("LockinParams: magnus_substeps must be >= 1");
  noise.validate();
}

namespace {

class LockinRunner {
 public:
  LockinRunner(const LockinParams& p, const SpinSystem& sys, const NoiseTrajectory* noise)
      : p_(p), sys_(sys), noise_(noise), jz2_(collective_operator(sys, Component::Jz2).matrix()),
        jz_(collective_operator(sys, Component::Jz).matrix()),
        drive_(detail::axis_generator(sys, p.pulse_axis)) {}

  double run(const StateVector& input, double tau_r) {
    if (!(p_.t_omega < tau_r)) throw DomainError("lockin: pulse width must be below spacing");
    psi_ = input.coeffs();
    double t = 0.0;
    const double lambda = p_.offset();
    const double half = 0.5 * p_.t_omega;
    for (int l = 1; l <= p_.pulses; ++l) {
      const double centre = (l - lambda) * tau_r;
      if (p_.t_omega == 0.0) {
        free(t, centre);
        psi_ = detail::axis_spectrum(sys_, p_.pulse_axis).apply(psi_, kPi);
        t = centre;
      } else {
        free(t, centre - half);
        pulse(centre - half, centre + half);
        t = centre + half;
      }
    }
    free(t, std::max(p_.pulses * tau_r, t));
    psi_ = detail::axis_spectrum(sys_, Axis::X).apply(psi_, kPi / 2);
    return diagonal_moments(sys_, psi_).jz;
  }

 private:
  double field(double t) const {
    const double noise = noise_ ? noise_->at(t) : 0.0;
    return p_.gamma_g * p_.b_ac * std::sin(p_.omega_s * t) + noise;
  }

  double field_integral(double a, double b) const {
    double out = p_.gamma_g * p_.b_ac * (std::cos(p_.omega_s * a) - std::cos(p_.omega_s * b)) /
                 p_.omega_s;
    if (noise_) out += noise_->integral(a, b);
    return out;
  }

  void free(double a, double b) {
    if (b <= a) return;
    const double chi_t = p_.chi * (b - a);
    const double phase = field_integral(a, b);
    psi_ = apply_diagonal(sys_, psi_, [&](double m) { return chi_t * m * m + phase * m; });
  }

  // Commutator-free 4th-order Magnus, two exponentials per substep.
  void pulse(double a, double b) {
    static const double c1 = 0.5 - std::sqrt(3.0) / 6;
    static const double c2 = 0.5 + std::sqrt(3.0) / 6;
    static const double w1 = (3 - 2 * std::sqrt(3.0)) / 12;
    static const double w2 = (3 + 2 * std::sqrt(3.0)) / 12;
    const double rabi = kPi / p_.t_omega;
    const int steps = p_.magnus_substeps;
    const double h = (b - a) / steps;
    const Dense fixed = p_.chi * jz2_ + rabi * drive_;
    for (int k = 0; k < steps; ++k) {
      const double s = a + k * h;
      const double f1 = field(s + c1 * h);
      const double f2 = field(s + c2 * h);
      const Dense first = fixed + (w2 * f1 + w1 * f2) / (w1 + w2) * jz_;
      const Dense second = fixed + (w1 * f1 + w2 * f2) / (w1 + w2) * jz_;
      // Weights sum to 1/2 per exponential.
      psi_ = SpectralPropagator<double>::from_hermitian(first).apply(psi_, (w1 + w2) * h);
      psi_ = SpectralPropagator<double>::from_hermitian(second).apply(psi_, (w1 + w2) * h);
    }
  }

  const LockinParams& p_;
  SpinSystem sys_;
  const NoiseTrajectory* noise_;
  Dense jz2_;
  Dense jz_;
  Dense drive_;
  CVector<double> psi_;
};

}  // namespace

double lockin_signal_full(const LockinParams& p, const StateVector& input, double tau_r) {
  p.validate();
  const SpinSystem sys = SpinSystem::from_dim(input.dim());
  if (p.noise.white_noise_sigma == 0.0) return LockinRunner(p, sys, nullptr).run(input, tau_r);

  const double duration = p.pulses * tau_r + p.t_omega;
  const double dt = p.noise_dt > 0 ? p.noise_dt : p.tau_s() / 20;
  double sum = 0.0;
  for (int k = 0; k < p.noise.ensemble_size; ++k) {
    const NoiseTrajectory traj = noise_trajectory(p.noise, duration, dt, static_cast<std::uint64_t>(k));
    sum += LockinRunner(p, sys, &traj).run(input, tau_r);
  }
  return sum / p.noise.ensemble_size;
}

double cp_drive_factor(double x) {
  if (x == 0.0) return 0.0;
  const double s = std::sin(0.5 * x);
  return s * s / (0.5 * x);
}

double pdd_drive_factor(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

double cp_drive_factor_alt(int pulses, double omega_s_dtau) {
  if (omega_s_dtau == 0.0) return 0.0;
  const double s = std::sin(0.5 * pulses * omega_s_dtau);
  return s * s / (pulses * std::sin(0.5 * omega_s_dtau));
}

double lockin_signal_effective(const LockinParams& p, LockinVariant variant,
                               const StateVector& input, double tau_r) {
  p.validate();
  const SpinSystem sys = SpinSystem::from_dim(input.dim());
  const double dtau = tau_r - p.tau_s();
  if (std::abs(dtau) > 0.1 * p.tau_s())
    default_warning_sink()("lockin_effective: |omega_s - omega_r| not small against omega_s");
  const double x = p.pulses * p.omega_s * dtau;
  const double drive = p.gamma_g * p.b_ac;
  const Dense jz = collective_operator(sys, Component::Jz).matrix();
  const Dense jz2 = collective_operator(sys, Component::Jz2).matrix();

  Dense h;
  Axis frame_axis = p.pulse_axis;
  switch (variant) {
    case LockinVariant::CpIdeal:
      h = p.chi * jz2 + (2 * drive / kPi) * cp_drive_factor(x) * jz;
      break;
    case LockinVariant::PddIdeal:
      h = p.chi * jz2 + (2 * drive / kPi) * pdd_drive_factor(x) * jz;
      break;
    case LockinVariant::CpFiniteWidthX:
    case LockinVariant::CpFiniteWidthY: {
      const bool x_axis = variant == LockinVariant::CpFiniteWidthX;
      frame_axis = x_axis ? Axis::X : Axis::Y;
      const FourierSeries f = fourier_coeffs(p.t_omega, tau_r, 999);
      double a_sum = 0.0;
      double b_sum = 0.0;
      for (std::size_t k = 0; k < f.a.size(); ++k) {
        a_sum += f.a[k] * f.a[k];
        b_sum += f.b[k] * f.b[k];
      }
      const Dense transverse =
          collective_operator(sys, x_axis ? Component::Jy : Component::Jx).matrix();
      const double sign = x_axis ? 1.0 : -1.0;
      h = 0.5 * p.chi * (a_sum * jz2 + b_sum * transverse * transverse) +
          0.5 * f.a[0] * drive * cp_drive_factor(x) * jz +
          sign * 0.5 * f.b[0] * drive * pdd_drive_factor(x) * transverse;
      break;
    }
  }

  CVector<double> psi = SpectralPropagator<double>::from_hermitian(h).apply(input.coeffs(),
                                                                           p.pulses * tau_r);
  // Back from the toggling frame: L pi rotations about the pulse axis.
  psi = detail::axis_spectrum(sys, frame_axis).apply(psi, p.pulses * kPi);
  psi = detail::axis_spectrum(sys, Axis::X).apply(psi, kPi / 2);
  return diagonal_moments(sys, psi).jz;
}

namespace {

SpectrumTable lockin_sweep(const LockinParams& p, std::span<const double> rel,
                           std::size_t workers, const std::function<double(double)>& signal) {
  p.validate();
  SpectrumTable table;
  table.rows = parallel_map(
      rel.size(),
      [&](std::size_t i) {
        const double tau_r = p.tau_s() * (1 + rel[i]);
        return SpectrumRow{rel[i], signal(tau_r), 0.0};
      },
      workers);
  return table;
}

}  // namespace

SpectrumTable lockin_full(const LockinParams& p, const StateVector& input,
                          std::span<const double> relative_detunings, std::size_t workers) {
  return lockin_sweep(p, relative_detunings, workers,
                      [&](double tau_r) { return lockin_signal_full(p, input, tau_r); });
}

SpectrumTable lockin_effective(const LockinParams& p, LockinVariant variant,
                               const StateVector& input,
                               std::span<const double> relative_detunings, std::size_t workers) {
  return lockin_sweep(p, relative_detunings, workers, [&](double tau_r) {
    return lockin_signal_effective(p, variant, input, tau_r);
  });
}

std::vector<double> lockin_default_grid(int pulses, int points) {
  if (pulses < 1 || points < 2) throw DomainError("lockin_default_grid: need L >= 1, points >= 2");
  const double span = 2.0 / pulses;
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = -span + 2 * span * i / (points - 1);
  return grid;
}

double lockin_accumulated_phase(const LockinPhaseModel& model, int n) {
  if (!(model.omega > 0) || !(model.tau_m > 0) || n < 1)
    throw DomainError("lockin_accumulated_phase: need omega, tau_m > 0 and n >= 1");
  const double end = 2 * n * model.tau_m;
  const double amp = model.gamma_g * model.b_ac / model.omega;
  double phase = 0.0;
  double sign = 1.0;
  double a = 0.0;
  for (int l = 1;; ++l) {
    const double b = std::min(end, (l - model.offset) * model.tau_m);
    if (b > a) phase += sign * amp * (std::cos(model.omega * a) - std::cos(model.omega * b));
    a = b;
    if (a >= end) break;
    sign = -sign;
  }
  return phase;
}

AcSignal lockin_entangled_signal(const StateSpec& state, int n_particles, double phi_l) {
  double value = 0.0;
  if (state.kind == StateSpec::Kind::Scs) {
    value = 0.5 * n_particles * std::sin(phi_l);
  } else {
    const CatAmplitudes amp(n_particles, state.kind == StateSpec::Kind::Ghz ? 0.0 : state.theta);
    const double parity = (amp.j() % 2 == 0) ? -1.0 : 1.0;  // (-1)^(J+1)
    for (int m = 1; m <= amp.j(); ++m) value += m * amp(m) * amp(m) * std::sin(2 * m * phi_l);
    value *= parity;
  }
  return {value, value};
}

AcSignal lockin_entangled_signal(const StateSpec& state, int n_particles,
                                 const LockinPhaseModel& model, int n, int n_max) {
  if (n_max < 1) throw DomainError("lockin_entangled_signal: n_max must be >= 1");
  AcSignal out;
  out.jz_n = lockin_entangled_signal(state, n_particles, lockin_accumulated_phase(model, n)).jz_n;
  double sum = 0.0;
  for (int k = 1; k <= n_max; ++k)
    sum += lockin_entangled_signal(state, n_particles, lockin_accumulated_phase(model, k)).jz_n;
  out.jz_avg = sum / n_max;
  return out;
}

StateVector imperfect_preparation(double omega_p, double epsilon, double chi, double delta,
                                  const SpinSystem& sys) {
  if (!(omega_p > 0)) throw DomainError("imperfect_preparation: omega_p must be > 0");
  const StateVector top = StateVector::basis(sys.dim(), 0);
  if (std::isinf(omega_p))
    return StateVector(
        detail::axis_spectrum(sys, Axis::Y).apply(top.coeffs(), 0.5 * kPi * (1 + epsilon)));
  const double t_p = (1 + epsilon) * kPi / (2 * omega_p);
  Segment seg{t_p, chi, delta, omega_p, Axis::Y};
  return evolve_unitary(top, segment_hamiltonian(sys, seg), t_p);
}

}  // namespace spdmbi
