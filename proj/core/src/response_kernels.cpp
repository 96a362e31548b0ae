#include "optoretro/response_kernels.hpp"

#include <cmath>

namespace optoretro {

namespace {

double heaviside(double t) {
  if (t > 0.0) return 1.0;
  if (t < 0.0) return 0.0;
  return 0.5;
}

Complex rho(Complex a, double t) { return heaviside(t) * std::exp(-a * t); }

// int_0^min(t,t') exp(-x t - y t' + (x + y) tau) dtau, with phases applied by the caller.
Complex pair_integral(Complex x, Complex y, double t, double tp) {
  const double lo = std::min(t, tp);
  if (lo <= 0.0) return {0.0, 0.0};
  const Complex s = x + y;
  if (std::abs(s) * lo > 1e-3) {
    // exp(-x (t - lo) - y (t' - lo)) - exp(-x t - y t'), divided by s.
    return (std::exp(-x * (t - lo) - y * (tp - lo)) - std::exp(-x * t - y * tp)) / s;
  }
  return std::exp(-x * (t - lo) - y * (tp - lo)) * std::exp(-s * lo) * expm1_ratio(s, lo);
}

}  // namespace

Complex complex_response(const ModeModel& m, double t) {
  return std::polar(1.0, m.phi) * rho(decay_constant(m), t);
}

Complex expm1_ratio(Complex x, double h) {
  const Complex z = x * h;
  if (std::abs(z) < 1e-3) {
    return h * (1.0 + z / 2.0 * (1.0 + z / 3.0 * (1.0 + z / 4.0 * (1.0 + z / 5.0 * (1.0 + z / 6.0)))));
  }
  return (std::exp(z) - 1.0) / x;
}

double response_correlation(const ModeModel& k, const ModeModel& l, double t, double tp) {
  const Complex ak = std::conj(decay_constant(k));
  const Complex al = decay_constant(l);
  const Complex den = ak + al;
  const Complex phase = std::polar(1.0, l.phi - k.phi);
  if (std::abs(den) * std::min(t, tp) > 1e-3) {
    // t, t' > 0 here, so the product term needs no half-step factor.
    const Complex num = rho(ak, t - tp) + rho(al, tp - t) - std::exp(-ak * t - al * tp);
    return std::real(phase * num / den);
  }
  return std::real(phase * pair_integral(ak, al, t, tp));
}

double counter_rotating_correlation(const ModeModel& k, const ModeModel& l, double t, double tp) {
  const Complex phase = std::polar(1.0, k.phi + l.phi);
  return std::real(phase * pair_integral(decay_constant(k), decay_constant(l), t, tp));
}

double momentum_correlation(const ModeModel& k, const ModeModel& l, double t, double tp) {
  return 0.5 * (response_correlation(k, l, t, tp) - counter_rotating_correlation(k, l, t, tp));
}

double broadened_response_correlation(const ModeModel& k, const ModeModel& l, double t,
                                      double tp, bool same_mode) {
  const Complex ak = std::conj(decay_constant(k));
  const Complex al = decay_constant(l);
  const Complex den = ak + al;
  const Complex phase = std::polar(1.0, l.phi - k.phi);
  const auto env = [](double sigma, double s) { return std::exp(-0.5 * sigma * sigma * s * s); };

  const double d = t - tp;
  Complex num = rho(ak, d) * env(k.sigma, d) + rho(al, -d) * env(l.sigma, d);
  Complex prod = std::exp(-ak * t - al * tp);
  if (same_mode) {
    // Shared draw: exp(i w (t - t')) averages to the envelope of the difference.
    prod *= env(k.sigma, d);
  } else {
    prod *= env(k.sigma, t) * env(l.sigma, tp);
  }
  if (t <= 0.0 || tp <= 0.0) prod = 0.0;
  num -= prod;
  if (std::abs(den) < 1e-300) {
    throw NumericalError("broadened kernel: degenerate denominator is not supported");
  }
  return std::real(phase * num / den);
}

}  // namespace optoretro
