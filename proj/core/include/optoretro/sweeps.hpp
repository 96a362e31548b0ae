#pragma once

#include "optoretro/filters.hpp"
#include "optoretro/model.hpp"
#include "optoretro/noise_statistics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace optoretro {

/// Logarithmic grid from lo to hi (inclusive) with `per_decade` points per decade.
std::vector<double> log_grid(double lo, double hi, double per_decade = 40.0);

/// Golden-section minimization of f over log(x) in [lo, hi].
struct Minimum {
  double x = 0.0;
  double value = 0.0;
};
Minimum minimize_log(const std::function<double(double)>& f, double lo, double hi,
                     double rel_tol = 1e-4);

/// Same physics with every oscillator's coupling re-solved for the given cooperativities.
ValidatedConfig with_cooperativities(const ValidatedConfig& config, const std::vector<double>& c);

/// Same physics with oscillator i's frequency replaced.
ValidatedConfig with_omega(const ValidatedConfig& config, std::size_t i, double omega);

/// Standard error of half the trace of block i of a sample covariance.
double occupation_se(const Mat& sigma, std::size_t i, std::size_t n_s);

/// (nu + 1/2) G/g + (C/2) G/g + (G + g)^2 / (8 eps C G g): the high-Q closed forms.
double analytic_added_noise(double gamma_osc, double gamma_filter, double c, double nu, double epsilon);

struct SqlSweepRequest {
  ValidatedConfig base;  ///< single oscillator
  std::vector<double> cooperativities;
  std::vector<double> gamma_ratios;  ///< filter decay rate / Gamma
  std::size_t mc_shots = 0;          ///< Monte Carlo spot check at each optimum (0 = off)
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct SqlSurfacePoint {
  double c = 0.0;
  double gamma_ratio = 0.0;
  double dn = 0.0;
  double dn_thermal = 0.0;
  double dn_backaction = 0.0;
  double dn_shot = 0.0;
  double cond = 0.0;
  std::string error;
};

struct SqlOptimum {
  double c = 0.0;
  double gamma_ratio_grid = 0.0;  ///< argmin on the sweep grid
  double dn_grid = 0.0;
  double gamma_ratio = 0.0;  ///< refined argmin
  double dn = 0.0;
  double gamma_ratio_formula = 0.0;
  double dn_at_formula = 0.0;
  double dn_analytic = 0.0;  ///< closed forms evaluated at the formula rate
  double asymptote = 0.0;    ///< 1 / (2 sqrt(eps))
  std::optional<double> mc_dn;
  std::optional<double> mc_se;
  std::string error;
};

struct SqlSweepResult {
  std::vector<SqlSurfacePoint> surface;  ///< cooperativity-major
  std::vector<SqlOptimum> optimum;
};

/// Added occupation of a single oscillator with an exponential filter.
NoiseCovarianceSet sql_noise(const ValidatedConfig& config, double gamma_filter);

SqlSweepResult sweep_single_sql(const SqlSweepRequest& request);

struct TwoModeSweepRequest {
  ValidatedConfig base;  ///< two oscillators; oscillator 1 is moved to omega_0 + delta
  std::vector<double> delta_ratios;  ///< delta / Gamma_0
  std::vector<double> cooperativities;
  GlsOptions gls;
  bool refine = true;
  unsigned threads = 0;
};

struct TwoModePoint {
  double delta_ratio = 0.0;
  double c = 0.0;
  double dn_gls = 0.0;
  double dn_exp = 0.0;
  double cross_gls = 0.0;
  double cross_exp = 0.0;
  double cond_gls = 0.0;
  double cond_exp = 0.0;
  std::string error;
};

struct TwoModeOptimum {
  double delta_ratio = 0.0;
  double c_opt = 0.0;
  double dn = 0.0;
  double cross_error = 0.0;
  double c_formula = 0.0;  ///< delta / (2 Gamma)
  std::string error;
};

struct TwoModeSweepResult {
  std::vector<TwoModePoint> points;  ///< delta-major
  std::vector<TwoModeOptimum> optimum;
};

/// GLS and single-oscillator exponential banks at one (delta, C) point.
TwoModePoint two_mode_point(const ValidatedConfig& base, double delta_ratio, double c,
                            const GlsOptions& gls = {});

/// Numerically optimal cooperativity for one detuning, searched within [c_lo, c_hi].
TwoModeOptimum two_mode_optimum(const ValidatedConfig& base, double delta_ratio, double c_lo,
                                double c_hi, const GlsOptions& gls = {},
                                const std::vector<TwoModePoint>& seed_points = {});

TwoModeSweepResult sweep_two_mode(const TwoModeSweepRequest& request);

}  // namespace optoretro
