#pragma once

#include "optoretro/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <vector>

namespace fixtures {

using optoretro::kTwoPi;

inline optoretro::OscillatorParams oscillator(double f_hz, double gamma_hz, double nu) {
  optoretro::OscillatorParams o;
  o.omega = kTwoPi * f_hz;
  o.gamma = kTwoPi * gamma_hz;
  o.nu = nu;
  o.g = kTwoPi * 1e3;
  return o;
}

inline optoretro::CavityParams cavity(double epsilon = 1.0) {
  optoretro::CavityParams c;
  c.kappa = kTwoPi * 5e6;
  c.nbar = 1e4;
  c.epsilon = epsilon;
  return c;
}

/// Oscillators with couplings chosen for the given cooperativities.
inline optoretro::ValidatedConfig make_config(std::vector<optoretro::OscillatorParams> oscs,
                                              const std::vector<double>& c, double fs, double tf,
                                              double epsilon = 1.0) {
  optoretro::SystemConfig cfg;
  cfg.cavity = cavity(epsilon);
  for (std::size_t i = 0; i < oscs.size(); ++i) {
    oscs[i].g = optoretro::coupling_for_cooperativity(c[i], oscs[i], cfg.cavity);
  }
  cfg.oscillators = std::move(oscs);
  cfg.grid = optoretro::SamplingGrid(fs, tf);
  return optoretro::validate(cfg);
}

/// 125 kHz oscillator damped at 2 kHz, 5 MHz sampling over 1 ms.
inline optoretro::ValidatedConfig single(double c, double nu, double tf = 1e-3, double fs = 5e6) {
  return make_config({oscillator(125e3, 2e3, nu)}, {c}, fs, tf);
}

/// Adaptive Gauss-Kronrod integral of f over [a, b].
template <class F>
double integrate(F f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 4, 1e-14);
}

/// Readout response of mode m to a unit kick of quadrature q (0 = X, 1 = P)
/// after a delay s, written directly from the equations of motion.
inline double kick_response(const optoretro::ModeModel& m, int q, double s) {
  if (s < 0.0) return 0.0;
  const double env = std::exp(-0.5 * m.gamma * s);
  const double c = std::cos(m.omega * s);
  const double sn = std::sin(m.omega * s);
  // X kick: X = c, P = -s; P kick: X = s, P = c. Readout X cos(phi) - P sin(phi).
  const double x = q == 0 ? c : sn;
  const double p = q == 0 ? -sn : c;
  return env * (x * std::cos(m.phi) - p * std::sin(m.phi));
}

}  // namespace fixtures
