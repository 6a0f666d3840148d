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

#include "spdmbi/analytics.hpp"

#include <cmath>
#include <numbers>

#include "spdmbi/parallel.hpp"

namespace spdmbi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSingular = 1e-9;

void require_even(int n, const char* where) {
  if (n < 2 || n % 2 != 0)
    throw UnsupportedDomainError(std::string(where) +
                                 ": closed form needs even N; use the numerical protocols");
}

// (-1)^(J+1) for integer J
double parity_j_plus_1(int j) { return j % 2 == 0 ? -1.0 : 1.0; }

double sign_pow(int k) { return k % 2 == 0 ? 1.0 : -1.0; }

double raise(int j, int m) {
  if (std::abs(m) > j) return 0.0;
  return ladder_coefficient(j, m, Ladder::Raise);
}

// Precision factor shared by the dc and ac coherent-state forms:
// phase = delta T (or n phi), twist = chi T (or 2 chi t_n).
double scs_factor(int n, double twist, double phase) {
  const double c1 = std::pow(std::cos(twist), n - 1);
  const double c2 = n >= 2 ? std::pow(std::cos(2 * twist), n - 2) : 0.0;
  const double s = std::sin(phase);
  const double var = 0.5 * (n + 1 - (n - 1) * c2) - s * s * (n * c1 * c1 - (n - 1) * c2);
  const double den = std::abs(std::cos(phase) * c1);
  if (den < 1e-14) throw DegenerateSlopeError("precision_scs_closed: vanishing slope");
  return std::sqrt(std::max(var, 0.0)) / den;
}

// sum_{n=1}^{count} sin(n x)
double sine_sum(double x, int count) {
  const double half = std::sin(0.5 * x);
  if (std::abs(half) > kSingular)
    return (std::cos(0.5 * x) - std::cos((count + 0.5) * x)) / (2 * half);
  double s = 0.0;
  for (int n = 1; n <= count; ++n) s += std::sin(n * x);
  return s;
}

}  // namespace

CatAmplitudes::CatAmplitudes(int n_particles, double theta) : j_(n_particles / 2) {
  require_even(n_particles, "CatAmplitudes");
  const SpinSystem sys(n_particles);
  const StateVector cat = spin_cat(sys, theta, nullptr);
  values_.resize(sys.dim());
  for (int m = -j_; m <= j_; ++m)
    values_[m + j_] = std::sqrt(2.0) * cat[sys.row_of(m)].real();
}

double CatAmplitudes::operator()(int m) const {
  if (std::abs(m) > j_) return 0.0;
  return values_[m + j_];
}

double jz_scs_closed(int n, double chi, double delta, double T) {
  if (n < 1) throw DomainError("jz_scs_closed: N must be >= 1");
  return 0.5 * n * std::sin(delta * T) * std::pow(std::cos(chi * T), n - 1);
}

double jz2_scs_closed(int n, double chi, double delta, double T) {
  if (n < 1) throw DomainError("jz2_scs_closed: N must be >= 1");
  const double tail = n >= 2 ? std::pow(std::cos(2 * chi * T), n - 2) : 0.0;
  return n * (n + 1) / 8.0 - n * (n - 1) / 8.0 * tail * std::cos(2 * delta * T);
}

Moments cat_closed_II(int n, double theta, double chi, double delta, double T, double t_r) {
  require_even(n, "cat_closed_II");
  const CatAmplitudes a(n, theta);
  const int j = a.j();
  const double c = std::cos(delta * t_r);
  const double s = std::sin(delta * t_r);

  double linear = 0.0;
  for (int k = 1; k <= j; ++k) linear += sign_pow(k) * k * a(k) * a(k) * std::sin(2 * k * delta * T);
  linear *= parity_j_plus_1(j) * c;

  // Half-integer m' = k + 1/2 couples a_k and a_{k+1}.
  double twisted = 0.0;
  double cross = 0.0;
  for (int k = 0; k < j; ++k) {
    const double mp = k + 0.5;
    const double coupling = raise(j, k) * a(k) * a(k + 1);
    const double twist = std::sin(2 * chi * T * mp);
    twisted += sign_pow(j - 1 - k) * twist * coupling * std::cos(2 * mp * delta * T);
    cross += twist * 2 * mp * coupling;
  }
  cross *= std::sin(delta * T);

  double z2 = 0.0;
  for (int k = 1; k <= j; ++k) z2 += double(k) * k * a(k) * a(k);
  double diag = 0.0;
  for (int m = -j + 1; m <= j; ++m) diag += (j * (j + 1.0) - m * (m - 1.0)) * a(m) * a(m);
  double off = 0.0;
  for (int m = -j; m <= j - 2; ++m)
    off += std::cos(4 * chi * T * (m + 1)) * raise(j, m + 1) * raise(j, m) * a(m) * a(m + 2);

  Moments out;
  out.jz = linear - s * twisted;
  out.jz2 = c * c * z2 + 0.5 * std::sin(2 * delta * t_r) * cross +
            0.25 * s * s * (diag + off * std::cos(2 * delta * T));
  return out;
}

Moments cat_closed_III(int n, double theta, double delta, double T) {
  require_even(n, "cat_closed_III");
  const CatAmplitudes a(n, theta);
  Moments out;
  for (int k = 1; k <= a.j(); ++k) {
    const double w = a(k) * a(k);
    out.jz += k * w * std::sin(2 * k * delta * T);
    out.jz2 += double(k) * k * w;
  }
  out.jz *= parity_j_plus_1(a.j());
  return out;
}

double qfi_variance(const StateVector& state, double T, double gamma_g) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  const OperatorMatrix jz = collective_operator(sys, Component::Jz);
  const OperatorMatrix jz2 = collective_operator(sys, Component::Jz2);
  const double mean = expectation(state, jz);
  return 4 * T * T * gamma_g * gamma_g * (expectation(state, jz2) - mean * mean);
}

double qfi_derivative(const std::function<StateVector(double)>& family, double at, double h) {
  if (!(h > 0)) throw DomainError("qfi_derivative: h must be > 0");
  const auto centre = family(at).coeffs();
  const CVector<double> d = (family(at + h).coeffs() - family(at - h).coeffs()) / (2 * h);
  return 4 * (d.squaredNorm() - std::norm(d.dot(centre)));
}

double qfi_derivative(const StateVector& state, double T, double gamma_g, double h) {
  const SpinSystem sys = SpinSystem::from_dim(state.dim());
  auto family = [&](double field) {
    CVector<double> psi = state.coeffs();
    for (Index r = 0; r < sys.dim(); ++r)
      psi(r) *= std::polar(1.0, -gamma_g * field * T * sys.m_at(r));
    return StateVector(std::move(psi));
  };
  return qfi_derivative(family, 0.0, h);
}

double qcrb(double f_q, int nu) {
  if (!(f_q > 0)) throw DomainError("qcrb: Fisher information must be > 0");
  if (nu < 1) throw DomainError("qcrb: nu must be >= 1");
  return 1.0 / std::sqrt(nu * f_q);
}

namespace {

PropagatedPrecision propagate(const SpectrumRow& lo, const SpectrumRow& mid, const SpectrumRow& hi,
                              double gamma_g, double h) {
  PropagatedPrecision out;
  out.stencil = h;
  out.slope = (hi.jz - lo.jz) / (2 * h);
  out.stddev = std::sqrt(std::max(mid.variance(), 0.0));
  if (std::abs(out.slope) < 1e-14)
    throw DegenerateSlopeError("precision_error_prop: slope vanishes, precision undefined");
  out.precision = out.stddev / (std::abs(gamma_g) * std::abs(out.slope));
  return out;
}

}  // namespace

PropagatedPrecision precision_error_prop(const SpectrumTable& spectrum, double at, double gamma_g,
                                         double stencil_h) {
  if (!(stencil_h > 0)) throw DomainError("precision_error_prop: stencil must be > 0");
  auto find = [&](double x) -> const SpectrumRow& {
    const double tol = 1e-9 * std::max({1.0, std::abs(x), stencil_h * 1e3});
    for (const auto& r : spectrum.rows)
      if (std::abs(r.param - x) <= std::min(tol, 1e-3 * stencil_h)) return r;
    throw DomainError("precision_error_prop: grid lacks a point at the stencil");
  };
  return propagate(find(at - stencil_h), find(at), find(at + stencil_h), gamma_g, stencil_h);
}

PropagatedPrecision precision_error_prop(const std::function<SpectrumRow(double)>& evaluate,
                                         double at, double gamma_g, double stencil_h) {
  if (!(stencil_h > 0)) throw DomainError("precision_error_prop: stencil must be > 0");
  return propagate(evaluate(at - stencil_h), evaluate(at), evaluate(at + stencil_h), gamma_g,
                   stencil_h);
}

double precision_scs_closed(int n, double chi, double delta, double T, double gamma_g) {
  if (n < 1) throw DomainError("precision_scs_closed: N must be >= 1");
  return scs_factor(n, chi * T, delta * T) / (gamma_g * T * std::sqrt(double(n)));
}

double cat_precision_factor(int n, double theta, double phase) {
  require_even(n, "cat_precision_factor");
  const CatAmplitudes a(n, theta);
  double jz = 0.0;
  double z2 = 0.0;
  double slope = 0.0;
  for (int k = 1; k <= a.j(); ++k) {
    const double w = a(k) * a(k);
    jz += k * w * std::sin(2 * k * phase);
    z2 += double(k) * k * w;
    slope += 2.0 * k * k * w * std::cos(2 * k * phase);
  }
  if (std::abs(slope) < 1e-14) throw DegenerateSlopeError("cat_precision_factor: vanishing slope");
  return std::sqrt(std::max(z2 - jz * jz, 0.0)) / std::abs(slope);
}

double precision_cat_closed(int n, double theta, double delta, double T, double gamma_g) {
  return cat_precision_factor(n, theta, delta * T) / (gamma_g * T);
}

double precision_ac_closed(const StateSpec& state, int n_particles, int n, double phi,
                           double omega, double gamma_g, double chi) {
  if (n < 1 || !(omega > 0)) throw DomainError("precision_ac_closed: need n >= 1 and omega > 0");
  const double scale = omega / (4 * n * gamma_g);
  if (state.kind == StateSpec::Kind::Scs) {
    const double t_n = 2 * n * kPi / omega;
    return scs_factor(n_particles, 2 * chi * t_n, n * phi) * scale / std::sqrt(double(n_particles));
  }
  const double theta = state.kind == StateSpec::Kind::Ghz ? 0.0 : state.theta;
  return cat_precision_factor(n_particles, theta, n * phi) * scale;
}

AcSignal ac_closed_signals(const StateSpec& state, int n_particles, int n, int n_max, double phi,
                           double chi, double omega) {
  if (n < 1 || n_max < 1 || !(omega > 0))
    throw DomainError("ac_closed_signals: need n, n_max >= 1 and omega > 0");
  AcSignal out;
  if (state.kind == StateSpec::Kind::Scs) {
    auto signal = [&](int k) {
      const double t_k = 2 * k * kPi / omega;
      return 0.5 * n_particles * std::sin(k * phi) * std::pow(std::cos(2 * chi * t_k), n_particles - 1);
    };
    out.jz_n = signal(n);
    if (chi == 0.0) {
      out.jz_avg = 0.5 * n_particles * sine_sum(phi, n_max) / n_max;
    } else {
      double sum = 0.0;
      for (int k = 1; k <= n_max; ++k) sum += signal(k);
      out.jz_avg = sum / n_max;
    }
    return out;
  }

  const double theta = state.kind == StateSpec::Kind::Ghz ? 0.0 : state.theta;
  const CatAmplitudes a(n_particles, theta);
  const double parity = parity_j_plus_1(a.j());
  for (int m = 1; m <= a.j(); ++m) {
    const double w = m * a(m) * a(m);
    out.jz_n += w * std::sin(2 * m * n * phi);
    out.jz_avg += w * sine_sum(2 * m * phi, n_max);
  }
  out.jz_n *= parity;
  out.jz_avg *= parity / n_max;
  return out;
}

std::pair<double, double> loglog_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_fit: need >= 2 paired points");
  const double count = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("loglog_fit: values must be positive");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return {slope, (sy - slope * sx) / count};
}

ScalingResult scaling_scan(const StateSpec& state, const DcProtocolParams& base,
                           std::span<const int> ns, double gamma_g, double stencil_h,
                           std::size_t workers) {
  if (ns.size() < 5) throw DomainError("scaling_scan: need at least 5 values of N");
  ScalingResult out;
  out.points = parallel_map(
      ns.size(),
      [&](std::size_t i) {
        DcProtocolParams p = base;
        p.n_particles = ns[i];
        const StateVector input = make_state(SpinSystem(p.n_particles), state, nullptr);
        const auto pp = precision_error_prop(
            [&](double delta) { return dc_point(p, input, delta) ; }, 0.0, gamma_g, stencil_h);
        PrecisionPoint point;
        point.n_particles = p.n_particles;
        point.delta_or_phi = 0.0;
        point.precision = pp.precision;
        point.qcrb = qcrb(qfi_variance(input, p.T, gamma_g));
        point.method = PrecisionMethod::ErrorProp;
        return point;
      },
      workers);
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : out.points) {
    x.push_back(p.n_particles);
    y.push_back(p.precision);
  }
  std::tie(out.exponent, out.log_prefactor) = loglog_fit(x, y);
  return out;
}

}  // namespace spdmbi
