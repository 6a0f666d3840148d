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

#include "spdmbi/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

#include "spdmbi/analytics.hpp"
#include "spdmbi/errors.hpp"
#include "spdmbi/parallel.hpp"

#ifndef SPDMBI_VERSION
#define SPDMBI_VERSION "dev"
#endif

namespace spdmbi::cli {

namespace {

constexpr double kPi = std::numbers::pi;

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("invalid value for '" + std::string(key) + "': " + text);
  return value;
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// ------------------------------------------------------------ settings

void Settings::set(std::string key, std::string value) {
  values_[normalize_key(std::move(key))] = std::move(value);
}

const std::string* Settings::find(std::string_view key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool Settings::has(std::string_view key) const { return find(key) != nullptr; }

double Settings::real(std::string_view key, double fallback) const {
  double v = fallback;
  if (const auto* s = find(key)) v = parse_number<double>(key, *s);
  if (!std::isfinite(v)) throw ConfigError("non-finite value for '" + std::string(key) + "'");
  resolved_[std::string(key)] = format_real(v);
  return v;
}

int Settings::integer(std::string_view key, int fallback) const {
  int v = fallback;
  if (const auto* s = find(key)) v = parse_number<int>(key, *s);
  resolved_[std::string(key)] = std::to_string(v);
  return v;
}

std::string Settings::text(std::string_view key, std::string fallback) const {
  std::string v = fallback;
  if (const auto* s = find(key)) v = *s;
  resolved_[std::string(key)] = v;
  return v;
}

bool Settings::flag(std::string_view key) const {
  bool v = false;
  if (const auto* s = find(key)) {
    if (*s == "true" || *s == "1" || *s == "yes" || s->empty())
      v = true;
    else if (*s == "false" || *s == "0" || *s == "no")
      v = false;
    else
      throw ConfigError("invalid value for '" + std::string(key) + "': " + *s);
  }
  resolved_[std::string(key)] = v ? "true" : "false";
  return v;
}

void Settings::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, value] : values_)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown key '" + key + "'");
}

Settings load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  Settings s;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": empty key");
    s.set(key, trim(std::string_view(body).substr(eq + 1)));
  }
  return s;
}

// ------------------------------------------------------------ commands

namespace {

enum class Kind { Real, Int, Text, Flag };

struct Key {
  std::string name;
  Kind kind;
  std::string help;
};

const std::vector<Key>& common_keys() {
  static const std::vector<Key> keys{
      {"out", Kind::Text, "CSV output path (stdout when absent); a .json sidecar is written next to it"},
      {"workers", Kind::Int, "worker threads (0: SPDMBI_THREADS or hardware)"},
      {"seed", Kind::Int, "random seed"},
      {"gamma", Kind::Real, "gyromagnetic ratio"},
  };
  return keys;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<Key> keys;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> list{
      {"ramsey-dc",
       "dc Ramsey spectrum: delta,jz,jz2,precision,qcrb",
       {{"protocol", Kind::Text, "1, 2 or 3"},
        {"state", Kind::Text, "scs | ghz | cat:<theta>"},
        {"n", Kind::Int, "particle number"},
        {"chi", Kind::Real, "interrogation nonlinearity"},
        {"chi-r", Kind::Real, "readout nonlinearity (protocols 2, 3)"},
        {"t", Kind::Real, "interrogation time"},
        {"t-r", Kind::Real, "readout interval (default pi / (2 chi_r))"},
        {"ideal", Kind::Flag, "impulse pulses"},
        {"omega", Kind::Real, "Rabi frequency of finite pulses"},
        {"epsilon", Kind::Real, "relative pulse-length error"},
        {"gamma-z", Kind::Real, "collective dephasing rate"},
        {"delta-span", Kind::Real, "detuning grid width, centred on 0"},
        {"points", Kind::Int, "grid points"},
        {"closed-form", Kind::Flag, "use closed-form expressions"}}},
      {"ramsey-ac",
       "ac amplitude signal: phi_mod,jz_n,jz_avg",
       {{"state", Kind::Text, "scs | ghz | cat:<theta>"},
        {"n", Kind::Int, "particle number"},
        {"chi", Kind::Real, "nonlinearity"},
        {"omega-sig", Kind::Real, "ac angular frequency"},
        {"b-ac", Kind::Real, "ac amplitude"},
        {"n-cycles", Kind::Int, "cycles n"},
        {"n-max", Kind::Int, "cycles averaged"},
        {"phi-span", Kind::Real, "phase grid width, centred on 0"},
        {"points", Kind::Int, "grid points"},
        {"closed-form", Kind::Flag, "use closed-form expressions"}}},
      {"lockin",
       "lock-in spectrum: dtau_rel,signal_full,signal_eff",
       {{"sequence", Kind::Text, "cpmg | pdd"},
        {"axis", Kind::Text, "x | y"},
        {"state", Kind::Text, "scs | ghz | cat:<theta>"},
        {"n", Kind::Int, "particle number"},
        {"pulses", Kind::Int, "pulse count L"},
        {"omega-s", Kind::Real, "signal angular frequency"},
        {"t-omega", Kind::Real, "pulse width (0: impulses)"},
        {"chi", Kind::Real, "nonlinearity"},
        {"b-ac", Kind::Real, "signal amplitude"},
        {"noise-sigma", Kind::Real, "white-noise amplitude"},
        {"ensemble", Kind::Int, "noise trajectories"},
        {"points", Kind::Int, "grid points over |dtau/tau_s| <= 2/L"}}},
      {"scaling",
       "precision scaling at delta = 0: n,precision,qcrb",
       {{"state", Kind::Text, "scs | ghz | cat:<theta>"},
        {"protocol", Kind::Text, "1, 2 or 3"},
        {"n", Kind::Text, "list a,b,c or range lo:hi:step"},
        {"chi", Kind::Real, "interrogation nonlinearity"},
        {"chi-r", Kind::Real, "readout nonlinearity"},
        {"t", Kind::Real, "interrogation time"},
        {"stencil", Kind::Real, "central-difference half width"}}},
      {"qfi",
       "quantum Fisher information: n,qfi_variance,qfi_derivative,qcrb",
       {{"state", Kind::Text, "scs | ghz | cat:<theta>"},
        {"n", Kind::Int, "particle number"},
        {"t", Kind::Real, "interrogation time"},
        {"step", Kind::Real, "finite-difference step"}}},
      {"verify", "closed forms and operator identities against matrix evolution", {}},
  };
  return list;
}

struct Output {
  std::string csv;
  std::string note;  // extra human-readable line
  int status = 0;
};

StateSpec parse_state(const std::string& text) {
  if (text == "scs") return StateSpec::scs();
  if (text == "ghz") return StateSpec::ghz();
  if (text.rfind("cat:", 0) == 0) return StateSpec::cat(parse_number<double>("state", text.substr(4)));
  throw ConfigError("invalid value for 'state': " + text);
}

DcProtocol parse_protocol(const std::string& text) {
  if (text == "1" || text == "I") return DcProtocol::I;
  if (text == "2" || text == "II") return DcProtocol::II;
  if (text == "3" || text == "III") return DcProtocol::III;
  throw ConfigError("invalid value for 'protocol': " + text);
}

std::vector<double> centred_grid(double span, int points) {
  if (points < 3) throw ConfigError("'points' must be >= 3");
  if (!(span > 0)) throw ConfigError("grid span must be > 0");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = -span / 2 + span * i / (points - 1);
  g[points / 2] = points % 2 == 1 ? 0.0 : g[points / 2];
  return g;
}

std::vector<int> parse_ns(const std::string& text) {
  std::vector<int> out;
  if (text.find(':') != std::string::npos) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number<int>("n", item));
    if (parts.size() != 3 || parts[2] <= 0 || parts[0] > parts[1])
      throw ConfigError("invalid value for 'n': " + text);
    for (int v = parts[0]; v <= parts[1]; v += parts[2]) out.push_back(v);
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number<int>("n", trim(item)));
  }
  return out;
}

std::string csv_row(std::initializer_list<double> values) {
  std::string line;
  for (double v : values) {
    if (!line.empty()) line += ',';
    line += std::isnan(v) ? std::string("nan") : format_real(v);
  }
  return line + '\n';
}

constexpr double kDefaultChiR = 0.04 * kPi;

// Impulses unless a Rabi frequency is given (or `force_ideal`).
DcProtocolParams dc_params(const Settings& s, bool force_ideal) {
  DcProtocolParams p;
  p.protocol = parse_protocol(s.text("protocol", "1"));
  p.chi = s.real("chi", 0.0);
  p.chi_r = s.real("chi-r", kDefaultChiR);
  p.T = s.real("t", 1.0);
  if (s.has("t-r")) p.readout_time = s.real("t-r", 0.0);
  const bool ideal = s.flag("ideal") || force_ideal || !s.has("omega");
  s.record("ideal", ideal ? "true" : "false");
  if (!ideal) p.rabi = s.real("omega", 0.0);
  p.epsilon = s.real("epsilon", 0.0);
  p.dephasing_rate = s.real("gamma-z", 0.0);
  return p;
}

Output ramsey_dc(const Settings& s, std::size_t workers) {
  DcProtocolParams p = dc_params(s, false);
  p.n_particles = s.integer("n", 20);
  p.validate();
  const StateSpec state = parse_state(s.text("state", "scs"));
  const double gamma = s.real("gamma", 1.0);
  const auto grid = centred_grid(s.real("delta-span", 2 * kPi), s.integer("points", 101));
  const bool closed = s.flag("closed-form");
  const StateVector input = make_state(SpinSystem(p.n_particles), state);

  SpectrumTable table;
  if (closed) {
    if (!p.ideal() || p.epsilon != 0.0 || p.dephasing_rate != 0.0)
      throw ConfigError("closed forms need ideal pulses, epsilon = 0 and gamma-z = 0");
    const bool scs = state.kind == StateSpec::Kind::Scs;
    if (scs != (p.protocol == DcProtocol::I))
      throw ConfigError("closed forms cover the coherent state with protocol 1 and cat/GHZ with 2, 3");
    if (!scs && p.n_particles % 2 != 0) throw ConfigError("closed cat forms need even 'n'");
    if (p.protocol == DcProtocol::II && std::abs(p.chi_r * p.t_r() - kPi / 2) > 1e-12)
      throw ConfigError("protocol-2 closed form needs chi-r * t-r = pi/2");
    const double theta = state.kind == StateSpec::Kind::Cat ? state.theta : 0.0;
    for (double d : grid) {
      Moments m;
      if (scs)
        m = {jz_scs_closed(p.n_particles, p.chi, d, p.T), jz2_scs_closed(p.n_particles, p.chi, d, p.T)};
      else if (p.protocol == DcProtocol::II)
        m = cat_closed_II(p.n_particles, theta, p.chi, d, p.T, p.t_r());
      else
        m = cat_closed_III(p.n_particles, theta, d, p.T);
      table.rows.push_back({d, m.jz, m.jz2});
    }
  } else {
    table = dc_spectrum(p, input, grid, workers);
  }

  const double bound = qcrb(qfi_variance(input, p.T, gamma));
  const double h = grid[1] - grid[0];
  Output out;
  out.csv = "delta,jz,jz2,precision,qcrb\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    double precision = std::nan("");
    if (i > 0 && i + 1 < table.size()) {
      try {
        precision = precision_error_prop(table, table[i].param, gamma, h).precision;
      } catch (const DegenerateSlopeError&) {
      }
    }
    out.csv += csv_row({table[i].param, table[i].jz, table[i].jz2, precision, bound});
  }
  return out;
}

Output ramsey_ac(const Settings& s, std::size_t workers) {
  AcProtocolParams base;
  base.n_particles = s.integer("n", 20);
  base.chi = s.real("chi", 0.0);
  base.omega_sig = s.real("omega-sig", 200 * kPi);
  base.gamma_g = s.real("gamma", 1.0);
  base.b_ac = s.real("b-ac", 1.0);
  base.n_cycles = s.integer("n-cycles", 1);
  base.n_max = s.integer("n-max", 1);
  base.validate();
  const StateSpec state = parse_state(s.text("state", "scs"));
  const auto grid = centred_grid(s.real("phi-span", 0.5), s.integer("points", 101));
  const bool closed = s.flag("closed-form");
  if (closed && state.kind != StateSpec::Kind::Scs && base.n_particles % 2 != 0)
    throw ConfigError("closed cat forms need even 'n'");
  if (state.kind == StateSpec::Kind::Cat)
    make_state(SpinSystem(base.n_particles), state);  // surfaces the overlap warning once

  const auto rows = parallel_map(
      grid.size(),
      [&](std::size_t i) {
        if (closed)
          return ac_closed_signals(state, base.n_particles, base.n_cycles, base.n_max, grid[i],
                                   base.chi, base.omega_sig);
        AcProtocolParams p = base;
        p.b_dc = grid[i] * p.omega_sig / (2 * kPi * p.gamma_g) + 2 * p.b_ac / kPi;
        return ac_signal(p, state, default_readout(state));
      },
      workers);
  Output out;
  out.csv = "phi_mod,jz_n,jz_avg\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out.csv += csv_row({grid[i], rows[i].jz_n, rows[i].jz_avg});
  return out;
}

Output lockin(const Settings& s, std::size_t workers) {
  LockinParams p;
  const std::string seq = s.text("sequence", "cpmg");
  if (seq != "cpmg" && seq != "pdd") throw ConfigError("invalid value for 'sequence': " + seq);
  p.sequence = seq == "cpmg" ? LockinSequence::CPMG : LockinSequence::PDD;
  const std::string axis = s.text("axis", "y");
  if (axis != "x" && axis != "y") throw ConfigError("invalid value for 'axis': " + axis);
  p.pulse_axis = axis == "x" ? Axis::X : Axis::Y;
  p.pulses = s.integer("pulses", 100);
  p.omega_s = s.real("omega-s", 2 * kPi);
  p.t_omega = s.real("t-omega", 0.0);
  p.chi = s.real("chi", 0.0);
  p.b_ac = s.real("b-ac", 0.01);
  p.gamma_g = s.real("gamma", 1.0);
  p.noise.white_noise_sigma = s.real("noise-sigma", 0.0);
  p.noise.ensemble_size = s.integer("ensemble", 200);
  p.noise.seed = static_cast<std::uint64_t>(s.integer("seed", 0));
  p.validate();
  const int n = s.integer("n", 20);
  const StateVector input = make_state(SpinSystem(n), parse_state(s.text("state", "scs")));
  const int points = s.integer("points", 2001);
  if (points < 3) throw ConfigError("'points' must be >= 3");
  const auto grid = lockin_default_grid(p.pulses, points);

  LockinVariant variant;
  if (p.t_omega == 0.0 || p.sequence == LockinSequence::PDD)
    variant = p.sequence == LockinSequence::CPMG ? LockinVariant::CpIdeal : LockinVariant::PddIdeal;
  else
    variant = p.pulse_axis == Axis::X ? LockinVariant::CpFiniteWidthX : LockinVariant::CpFiniteWidthY;

  const auto full = lockin_full(p, input, grid, workers);
  const auto eff = lockin_effective(p, variant, input, grid, workers);
  Output out;
  out.csv = "dtau_rel,signal_full,signal_eff\n";
  for (std::size_t i = 0; i < grid.size(); ++i) out.csv += csv_row({grid[i], full[i].jz, eff[i].jz});
  out.note = "zero crossing (dtau/tau_s): " + format_real(zero_crossing(full));
  return out;
}

Output scaling(const Settings& s, std::size_t workers) {
  DcProtocolParams base = dc_params(s, true);
  const auto ns = parse_ns(s.text("n", "10:100:10"));
  if (ns.size() < 5) throw ConfigError("'n' needs at least 5 values");
  for (int v : ns)
    if (v < 1) throw ConfigError("'n' values must be >= 1");
  base.n_particles = ns.front();
  base.validate();
  const StateSpec state = parse_state(s.text("state", "scs"));
  const double gamma = s.real("gamma", 1.0);
  const auto r = scaling_scan(state, base, ns, gamma, s.real("stencil", 1e-4), workers);
  Output out;
  out.csv = "n,precision,qcrb\n";
  for (const auto& pt : r.points) out.csv += csv_row({double(pt.n_particles), pt.precision, pt.qcrb});
  out.note = "exponent: " + format_real(r.exponent);
  return out;
}

Output qfi(const Settings& s, std::size_t) {
  const int n = s.integer("n", 20);
  if (n < 1) throw ConfigError("'n' must be >= 1");
  const double T = s.real("t", 1.0);
  const double gamma = s.real("gamma", 1.0);
  const double h = s.real("step", 1e-5);
  if (!(h > 0)) throw ConfigError("'step' must be > 0");
  const StateVector input = make_state(SpinSystem(n), parse_state(s.text("state", "scs")));
  const double fv = qfi_variance(input, T, gamma);
  const double fd = qfi_derivative(input, T, gamma, h);
  Output out;
  out.csv = "n,qfi_variance,qfi_derivative,qcrb\n" + csv_row({double(n), fv, fd, qcrb(fv)});
  return out;
}

// ------------------------------------------------------------ verify

struct Check {
  std::string name;
  double error = 0.0;
  double tol = 0.0;
};

std::vector<Check> verification_checks(std::size_t workers) {
  std::vector<Check> checks;
  auto track = [](Check& c, double e) { c.error = std::max(c.error, std::abs(e)); };
  const std::vector<double> deltas = [] {
    std::vector<double> g(101);
    for (int i = 0; i < 101; ++i) g[i] = -kPi / 2 + kPi * i / 100;
    return g;
  }();

  Check scs_jz{"coherent <Jz>, protocol 1", 0, 1e-8}, scs_jz2{"coherent <Jz^2>, protocol 1", 0, 1e-8};
  Check b_jz{"cat <Jz>, protocol 2", 0, 1e-8}, b_jz2{"cat <Jz^2>, protocol 2", 0, 1e-8};
  Check c_jz{"cat <Jz>, protocol 3", 0, 1e-8}, c_jz2{"cat <Jz^2>, protocol 3", 0, 1e-8};
  Check ac_scs{"coherent ac J_n", 0, 1e-8}, ac_scs_avg{"coherent ac time average", 0, 1e-8};
  Check ac_cat{"cat ac J_n", 0, 1e-8}, ac_cat_avg{"cat ac time average", 0, 1e-8};
  for (int n : {8, 12, 20}) {
    for (double chi : {0.0, 0.04 * kPi}) {
      DcProtocolParams p;
      p.n_particles = n;
      p.chi = chi;
      p.chi_r = kDefaultChiR;
      const auto one = dc_spectrum(p, StateSpec::scs(), deltas, workers);
      for (const auto& r : one.rows) {
        track(scs_jz, r.jz - jz_scs_closed(n, chi, r.param, 1.0));
        track(scs_jz2, r.jz2 - jz2_scs_closed(n, chi, r.param, 1.0));
      }
      const auto cat = spin_cat(SpinSystem(n), kPi / 8, nullptr);
      p.protocol = DcProtocol::II;
      const auto two = dc_spectrum(p, cat, deltas, workers);
      p.protocol = DcProtocol::III;
      const auto three = dc_spectrum(p, cat, deltas, workers);
      for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto m2 = cat_closed_II(n, kPi / 8, chi, deltas[i], 1.0, p.t_r());
        const auto m3 = cat_closed_III(n, kPi / 8, deltas[i], 1.0);
        track(b_jz, two[i].jz - m2.jz);
        track(b_jz2, two[i].jz2 - m2.jz2);
        track(c_jz, three[i].jz - m3.jz);
        track(c_jz2, three[i].jz2 - m3.jz2);
      }
      AcProtocolParams a;
      a.n_particles = n;
      a.omega_sig = 200 * kPi;
      a.gamma_g = 20 * kPi;
      a.chi = chi;
      a.n_cycles = 2;
      a.n_max = 4;
      for (int i = 0; i < 101; ++i) {
        a.b_dc = 2 / kPi - 0.05 + 0.001 * i;
        const auto ns = ac_signal(a, StateSpec::scs(), AcReadout::HalfPiX);
        const auto cs = ac_closed_signals(StateSpec::scs(), n, 2, 4, a.phase(), chi, a.omega_sig);
        track(ac_scs, ns.jz_n - cs.jz_n);
        track(ac_scs_avg, ns.jz_avg - cs.jz_avg);
        const auto nc = ac_signal(a, StateSpec::cat(kPi / 8), AcReadout::TwistX);
        const auto cc = ac_closed_signals(StateSpec::cat(kPi / 8), n, 2, 4, a.phase(), chi, a.omega_sig);
        track(ac_cat, nc.jz_n - cc.jz_n);
        track(ac_cat_avg, nc.jz_avg - cc.jz_avg);
      }
    }
  }
  checks.insert(checks.end(), {scs_jz, scs_jz2, b_jz, b_jz2, c_jz, c_jz2, ac_scs, ac_scs_avg, ac_cat,
                               ac_cat_avg});

  Check reb{"protocol-2 readout = exp(-i(chi_r Jy^2 + delta Jy) t_r)", 0, 1e-10};
  Check echo{"protocol-3 readout = exp(-i chi_r t_r Jx^2)", 0, 1e-10};
  Check conj{"exp(-i pi/2 Jy^2) Jz^2 exp(i pi/2 Jy^2) = Jz^2", 0, 1e-10};
  Check exch{"exp(i pi Jx)|J,m> = i^N |J,-m>", 0, 1e-12};
  for (int n : {4, 8, 20}) {
    const SpinSystem sys(n);
    const auto jy = collective_operator(sys, Component::Jy).matrix();
    const auto jy2 = collective_operator(sys, Component::Jy2).matrix();
    const auto jx2 = collective_operator(sys, Component::Jx2).matrix();
    const auto jz2 = collective_operator(sys, Component::Jz2).matrix();
    const double t_r = kPi / (2 * kDefaultChiR);
    for (double d : {-0.7, 0.0, 1.3}) {
      PulseSchedule a;
      a.impulse(Axis::X, kPi / 2).free(t_r, kDefaultChiR, d).impulse(Axis::X, -kPi / 2);
      const CMatrix<double> ga = kDefaultChiR * jy2 + d * jy;
      track(reb, max_abs<double>(schedule_unitary(sys, a).matrix() -
                                 SpectralPropagator<double>::from_hermitian(ga).unitary(t_r)));
      PulseSchedule b;
      b.impulse(Axis::Y, kPi / 2).free(t_r / 2, kDefaultChiR, d).impulse(Axis::Y, -kPi);
      b.free(t_r / 2, kDefaultChiR, d).impulse(Axis::Y, kPi / 2);
      const CMatrix<double> gb = kDefaultChiR * jx2;
      track(echo, max_abs<double>(schedule_unitary(sys, b).matrix() -
                                  SpectralPropagator<double>::from_hermitian(gb).unitary(t_r)));
    }
    const auto u = SpectralPropagator<double>::from_hermitian(jy2).unitary(kPi / 2);
    track(conj, max_abs<double>(u * jz2 * u.adjoint() - jz2));
    const auto ex = rotation(sys, Axis::X, kPi).adjoint();
    for (Index r = 0; r < sys.dim(); ++r) {
      const auto out = ex * StateVector::basis(sys.dim(), r);
      track(exch, std::abs(out[sys.row_of(-sys.m_at(r))] - i_power(n)));
    }
  }
  checks.insert(checks.end(), {reb, echo, conj, exch});

  Check fisher{"QFI: derivative form vs variance form (relative)", 0, 1e-6};
  for (const StateSpec& st : {StateSpec::scs(), StateSpec::cat(kPi / 8), StateSpec::ghz()}) {
    const auto psi = make_state(SpinSystem(20), st, nullptr);
    const double fv = qfi_variance(psi, 1.0, 1.0);
    track(fisher, (qfi_derivative(psi, 1.0, 1.0, 1e-5) - fv) / fv);
  }
  checks.push_back(fisher);
  return checks;
}

Output verify(const Settings&, std::size_t workers) {
  Output out;
  for (const auto& c : verification_checks(workers)) {
    const bool ok = c.error <= c.tol;
    if (!ok) out.status = 3;
    char line[256];
    std::snprintf(line, sizeof line, "%s  %-58s max err %.3e (tol %.0e)\n", ok ? "PASS" : "FAIL",
                  c.name.c_str(), c.error, c.tol);
    out.note += line;
  }
  return out;
}

using Handler = std::function<Output(const Settings&, std::size_t)>;

Handler handler_for(const std::string& name) {
  if (name == "ramsey-dc") return ramsey_dc;
  if (name == "ramsey-ac") return ramsey_ac;
  if (name == "lockin") return lockin;
  if (name == "scaling") return scaling;
  if (name == "qfi") return qfi;
  return verify;
}

nlohmann::json config_json(const std::map<std::string, std::string>& resolved) {
  nlohmann::json j = nlohmann::json::object();
  auto full = [](const std::string& v, auto& out) {
    const char* end = v.data() + v.size();
    const auto [ptr, ec] = std::from_chars(v.data(), end, out);
    return ec == std::errc() && ptr == end;
  };
  for (const auto& [key, value] : resolved) {
    long long whole = 0;
    double number = 0;
    if (full(value, whole))
      j[key] = whole;
    else if (full(value, number))
      j[key] = number;
    else if (value == "true" || value == "false")
      j[key] = value == "true";
    else
      j[key] = value;
  }
  return j;
}

void write_outputs(const std::string& command, const Settings& s, const Output& result,
                   double seconds, std::ostream& out) {
  const std::string path = s.text("out", "");
  if (path.empty()) {
    out << result.csv;
    return;
  }
  {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw ConfigError("cannot write " + path);
    csv << result.csv;
  }
  nlohmann::json meta;
  meta["command"] = command;
  meta["config"] = config_json(s.resolved());
  meta["seed"] = s.integer("seed", 0);
  meta["version"] = SPDMBI_VERSION;
  meta["wall_time_s"] = seconds;
  std::ofstream side(path + ".json");
  if (!side) throw ConfigError("cannot write " + path + ".json");
  side << meta.dump(2) << '\n';
}

}  // namespace

int run(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Symmetry-protected many-body Ramsey interferometry simulator", "spdmbi"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SPDMBI_VERSION);

  // Flags land in `given`; a config file supplies the rest.
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, bool>> flags;
  std::map<std::string, std::string> config_path;
  std::map<std::string, CLI::App*> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    subs[cmd.name] = sub;
    sub->add_option("--config", config_path[cmd.name], "key = value settings file");
    std::vector<Key> keys = cmd.keys;
    keys.insert(keys.end(), common_keys().begin(), common_keys().end());
    for (const auto& k : keys) {
      if (k.kind == Kind::Flag)
        sub->add_flag("--" + k.name, flags[cmd.name][k.name], k.help);
      else
        sub->add_option("--" + k.name, raw[cmd.name][k.name], k.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  const Command* chosen = nullptr;
  for (const auto& cmd : commands())
    if (subs[cmd.name]->parsed()) chosen = &cmd;
  const CLI::App* sub = subs[chosen->name];

  try {
    Settings settings;
    if (!config_path[chosen->name].empty()) settings = load_config(config_path[chosen->name]);
    for (const auto& [key, value] : raw[chosen->name])
      if (sub->count("--" + key) > 0) settings.set(key, value);
    for (const auto& [key, on] : flags[chosen->name])
      if (sub->count("--" + key) > 0) settings.set(key, on ? "true" : "false");

    std::vector<std::string> known;
    for (const auto& k : chosen->keys) known.push_back(k.name);
    for (const auto& k : common_keys()) known.push_back(k.name);
    settings.require_known(known);

    const int workers = settings.integer("workers", 0);
    if (workers < 0) throw ConfigError("'workers' must be >= 0");
    const auto start = std::chrono::steady_clock::now();
    const Output result = handler_for(chosen->name)(settings, static_cast<std::size_t>(workers));
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_outputs(chosen->name, settings, result, seconds, out);
    // Notes go to stdout unless stdout already carries the CSV.
    if (!result.note.empty()) {
      std::ostream& dest = settings.has("out") || result.csv.empty() ? out : err;
      dest << result.note;
      if (result.note.back() != '\n') dest << '\n';
    }
    return result.status;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedDomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace spdmbi::cli
