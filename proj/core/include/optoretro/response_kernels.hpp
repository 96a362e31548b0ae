#pragma once

#include "optoretro/model.hpp"
#include "optoretro/types.hpp"

namespace optoretro {

/// Complex decay constant Gamma/2 + i omega of rho(t) = exp(-(Gamma/2 + i omega) t).
inline Complex decay_constant(const ModeModel& m) { return {0.5 * m.gamma, m.omega}; }

/// Phase-rotated complex response e^{i phi} rho(t) Theta(t), with Theta(0) = 1/2.
Complex complex_response(const ModeModel& m, double t);

/// (exp(x h) - 1) / x, stable as x -> 0.
Complex expm1_ratio(Complex x, double h);

/// R_kl(t, t') = int_0^min(t,t') dtau r_k(t - tau) . r_l(t' - tau).
///
/// Closed form from the complex responses; the degenerate denominator
/// (equal frequencies, no damping) falls back to its analytic limit.
double response_correlation(const ModeModel& k, const ModeModel& l, double t, double tp);

/// Counter-rotating companion int Re[rho_k(t - tau) rho_l(t' - tau)] dtau.
double counter_rotating_correlation(const ModeModel& k, const ModeModel& l, double t, double tp);

/// Momentum-drive kernel int [r_k(t - tau)]_P [r_l(t' - tau)]_P dtau = (R - R~) / 2.
/// This is the exact correlation of responses to a shared kick on P.
double momentum_correlation(const ModeModel& k, const ModeModel& l, double t, double tp);

/// Expectation of R_kl over Gaussian frequency noise (std sigma of each mode),
/// keeping the nominal denominator. Valid for sigma_k + sigma_l << |omega_k - omega_l|
/// when k != l; for k == l the frequency draw is shared.
double broadened_response_correlation(const ModeModel& k, const ModeModel& l, double t,
                                      double tp, bool same_mode);

}  // namespace optoretro
