#pragma once

#include "fixtures.hpp"

#include "optoretro/model.hpp"

#include <algorithm>
#include <cmath>

namespace fixtures {

inline optoretro::ModeModel kernel_mode(double f_hz, double gamma_hz, double phi) {
  optoretro::ModeModel m;
  m.omega = kTwoPi * f_hz;
  m.gamma = kTwoPi * gamma_hz;
  m.phi = phi;
  return m;
}

/// int_0^min(t,t') sum over kicked quadratures in `quads` of the readout
/// responses, integrated piecewise over quarter periods.
template <class W>
double kick_integral(const optoretro::ModeModel& k, const optoretro::ModeModel& l, double t, double tp, W weight) {
  const double hi = std::min(t, tp);
  if (hi <= 0.0) return 0.0;
  const double fmax = std::max(std::abs(k.omega), std::abs(l.omega)) / kTwoPi;
  const double piece = fmax > 0.0 ? 0.25 / fmax : hi;
  double sum = 0.0;
  for (double a = 0.0; a < hi; a += piece) {
    const double b = std::min(hi, a + piece);
    sum += integrate(
        [&](double tau) {
          double v = 0.0;
          for (int q = 0; q < 2; ++q) v += weight(q) * kick_response(k, q, t - tau) * kick_response(l, q, tp - tau);
          return v;
        },
        a, b);
  }
  return sum;
}

inline double oracle_R(const optoretro::ModeModel& k, const optoretro::ModeModel& l, double t, double tp) {
  return kick_integral(k, l, t, tp, [](int) { return 1.0; });
}

inline double oracle_counter(const optoretro::ModeModel& k, const optoretro::ModeModel& l, double t, double tp) {
  return kick_integral(k, l, t, tp, [](int q) { return q == 0 ? 1.0 : -1.0; });
}

inline double oracle_momentum(const optoretro::ModeModel& k, const optoretro::ModeModel& l, double t, double tp) {
  return kick_integral(k, l, t, tp, [](int q) { return q == 1 ? 1.0 : 0.0; });
}

}  // namespace fixtures
