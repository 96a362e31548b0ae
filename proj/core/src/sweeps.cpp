#include "optoretro/sweeps.hpp"

#include "optoretro/parallel.hpp"
#include "optoretro/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace optoretro {

std::vector<double> log_grid(double lo, double hi, double per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || !(per_decade > 0.0)) {
    throw ValidationError("grid", "log grid needs 0 < lo <= hi and a positive density");
  }
  const double decades = std::log10(hi / lo);
  const auto steps = static_cast<std::size_t>(std::llround(decades * per_decade));
  std::vector<double> out;
  if (steps == 0) return {lo};
  for (std::size_t i = 0; i <= steps; ++i) {
    out.push_back(lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(steps)));
  }
  return out;
}

Minimum minimize_log(const std::function<double(double)>& f, double lo, double hi, double rel_tol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(lo);
  double b = std::log(hi);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  while (b - a > rel_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(std::exp(d));
    }
  }
  return fc < fd ? Minimum{std::exp(c), fc} : Minimum{std::exp(d), fd};
}

ValidatedConfig with_cooperativities(const ValidatedConfig& config, const std::vector<double>& c) {
  if (c.size() != config.size()) throw Error("one cooperativity per oscillator is required");
  SystemConfig cfg = config.config();
  for (std::size_t i = 0; i < c.size(); ++i) {
    cfg.oscillators[i].g = coupling_for_cooperativity(c[i], cfg.oscillators[i], cfg.cavity);
  }
  return validate(cfg);
}

ValidatedConfig with_omega(const ValidatedConfig& config, std::size_t i, double omega) {
  SystemConfig cfg = config.config();
  cfg.oscillators.at(i).omega = omega;
  return validate(cfg);
}

double occupation_se(const Mat& sigma, std::size_t i, std::size_t n_s) {
  if (n_s < 2) throw Error("standard errors need at least 2 samples");
  const auto k = static_cast<Eigen::Index>(2 * i);
  const double a = sigma(k, k);
  const double b = sigma(k + 1, k + 1);
  const double c = sigma(k, k + 1);
  // var(S_aa) = 2 a^2 / (n-1), cov(S_aa, S_bb) = 2 c^2 / (n-1).
  return 0.5 * std::sqrt(2.0 * (a * a + b * b + 2.0 * c * c) / static_cast<double>(n_s - 1));
}

double analytic_added_noise(double gamma_osc, double gamma_filter, double c, double nu,
                            double epsilon) {
  const double r = gamma_osc / gamma_filter;
  const double sum = gamma_osc + gamma_filter;
  return (nu + 0.5) * r + 0.5 * c * r + sum * sum / (8.0 * epsilon * c * gamma_osc * gamma_filter);
}

NoiseCovarianceSet sql_noise(const ValidatedConfig& config, double gamma_filter) {
  if (config.size() != 1) throw ValidationError("oscillators", "SQL sweep needs exactly one oscillator");
  return noise_covariances(config, exp_filters(config, {gamma_filter}));
}

SqlSweepResult sweep_single_sql(const SqlSweepRequest& request) {
  if (request.base.size() != 1) throw ValidationError("oscillators", "SQL sweep needs exactly one oscillator");
  if (request.cooperativities.empty() || request.gamma_ratios.empty()) {
    throw ValidationError("axes", "sweep axes must be non-empty");
  }
  const auto& mode0 = request.base.modes()[0];
  const double gam = mode0.gamma;
  const double eps = request.base.cavity().epsilon;
  const std::size_t nc = request.cooperativities.size();
  const std::size_t ng = request.gamma_ratios.size();

  SqlSweepResult out;
  out.surface.resize(nc * ng);
  out.optimum.resize(nc);

  std::vector<std::optional<ValidatedConfig>> configs(nc);
  std::vector<std::string> config_errors(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    try {
      configs[i] = with_cooperativities(request.base, {request.cooperativities[i]});
    } catch (const std::exception& e) {
      config_errors[i] = e.what();
    }
  }

  parallel_for(nc * ng, request.threads, [&](std::size_t idx) {
    const std::size_t i = idx / ng;
    const std::size_t j = idx % ng;
    SqlSurfacePoint& p = out.surface[idx];
    p.c = request.cooperativities[i];
    p.gamma_ratio = request.gamma_ratios[j];
    if (!configs[i]) {
      p.error = config_errors[i];
      return;
    }
    try {
      const auto bank = exp_filters(*configs[i], {p.gamma_ratio * gam});
      p.cond = bank.cond;
      const auto set = noise_covariances(*configs[i], bank);
      p.dn = block_occupation(set.total(), 0);
      p.dn_thermal = block_occupation(set.T, 0);
      p.dn_backaction = block_occupation(set.B, 0);
      p.dn_shot = block_occupation(set.M, 0);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });

  const double g_lo = request.gamma_ratios.front();
  const double g_hi = request.gamma_ratios.back();
  parallel_for(nc, request.threads, [&](std::size_t i) {
    SqlOptimum& o = out.optimum[i];
    o.c = request.cooperativities[i];
    o.asymptote = 0.5 / std::sqrt(eps);
    if (!configs[i]) {
      o.error = config_errors[i];
      return;
    }
    try {
      const auto& cfg = *configs[i];
      std::size_t best = ng;
      for (std::size_t j = 0; j < ng; ++j) {
        const auto& p = out.surface[i * ng + j];
        if (p.error.empty() && (best == ng || p.dn < out.surface[i * ng + best].dn)) best = j;
      }
      if (best == ng) throw NumericalError("no valid point on the gamma axis");
      o.gamma_ratio_grid = request.gamma_ratios[best];
      o.dn_grid = out.surface[i * ng + best].dn;
      const double lo = request.gamma_ratios[best > 0 ? best - 1 : 0];
      const double hi = request.gamma_ratios[std::min(best + 1, ng - 1)];
      const auto f = [&](double r) { return block_occupation(sql_noise(cfg, r * gam).total(), 0); };
      if (hi > lo) {
        const Minimum m = minimize_log(f, std::max(lo, g_lo), std::min(hi, g_hi), 1e-5);
        o.gamma_ratio = m.x;
        o.dn = m.value;
      } else {
        o.gamma_ratio = o.gamma_ratio_grid;
        o.dn = o.dn_grid;
      }
      const double gopt = optimal_gamma(cfg.modes()[0], eps);
      o.gamma_ratio_formula = gopt / gam;
      o.dn_at_formula = f(o.gamma_ratio_formula);
      o.dn_analytic = analytic_added_noise(gam, gopt, o.c, mode0.nu, eps);

      if (request.mc_shots >= 2) {
        const auto bank = exp_filters(cfg, {o.gamma_ratio * gam});
        const double nu = cfg.modes()[0].nu;
        const auto state = thermal_state(std::vector<double>{nu});
        std::vector<Vec> estimates(request.mc_shots);
        for_each_shot(cfg, state, request.mc_shots, request.seed + i,
                      [&](std::size_t s, const Shot& shot) { estimates[s] = estimate(bank, shot.record); },
                      1);
        const auto est = sample_covariance(estimates);
        o.mc_dn = block_occupation(est.sigma - state.cov, 0);
        o.mc_se = occupation_se(est.sigma, 0, est.n_s);
      }
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });
  return out;
}

namespace {

ValidatedConfig two_mode_config(const ValidatedConfig& base, double delta_ratio, double c) {
  if (base.size() != 2) throw ValidationError("oscillators", "two-mode sweep needs exactly two oscillators");
  const double gam = base.modes()[0].gamma;
  ValidatedConfig cfg = with_omega(base, 1, base.modes()[0].omega + delta_ratio * gam);
  return with_cooperativities(cfg, {c, c});
}

}  // namespace

TwoModePoint two_mode_point(const ValidatedConfig& base, double delta_ratio, double c,
                            const GlsOptions& gls) {
  TwoModePoint p;
  p.delta_ratio = delta_ratio;
  p.c = c;
  try {
    const auto cfg = two_mode_config(base, delta_ratio, c);
    const auto gbank = gls_filters(cfg, gls);
    p.cond_gls = gbank.cond;
    const auto gset = noise_covariances(cfg, gbank);
    p.dn_gls = block_occupation(gset.total(), 0);
    p.cross_gls = std::abs(cross_error(gset, 0, 1));
    const auto ebank = exp_filters(cfg, optimal_gammas(cfg));
    p.cond_exp = ebank.cond;
    const auto eset = noise_covariances(cfg, ebank);
    p.dn_exp = block_occupation(eset.total(), 0);
    p.cross_exp = std::abs(cross_error(eset, 0, 1));
  } catch (const std::exception& e) {
    p.error = e.what();
    p.dn_gls = p.dn_exp = std::numeric_limits<double>::infinity();
  }
  return p;
}

TwoModeOptimum two_mode_optimum(const ValidatedConfig& base, double delta_ratio, double c_lo,
                                double c_hi, const GlsOptions& gls,
                                const std::vector<TwoModePoint>& seed_points) {
  TwoModeOptimum o;
  o.delta_ratio = delta_ratio;
  o.c_formula = 0.5 * delta_ratio;
  try {
    std::vector<TwoModePoint> pts = seed_points;
    if (pts.empty()) {
      for (double c : log_grid(c_lo, c_hi, 6.0)) pts.push_back(two_mode_point(base, delta_ratio, c, gls));
    }
    std::size_t best = pts.size();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (pts[j].error.empty() && (best == pts.size() || pts[j].dn_gls < pts[best].dn_gls)) best = j;
    }
    if (best == pts.size()) throw NumericalError("no valid cooperativity point");
    const double lo = pts[best > 0 ? best - 1 : 0].c;
    const double hi = pts[std::min(best + 1, pts.size() - 1)].c;
    double c_best = pts[best].c;
    if (hi > lo) {
      const auto f = [&](double c) { return two_mode_point(base, delta_ratio, c, gls).dn_gls; };
      c_best = minimize_log(f, lo, hi, 2e-2).x;
    }
    const auto p = two_mode_point(base, delta_ratio, c_best, gls);
    if (!p.error.empty()) throw NumericalError(p.error);
    o.c_opt = c_best;
    o.dn = p.dn_gls;
    o.cross_error = p.cross_gls;
  } catch (const std::exception& e) {
    o.error = e.what();
  }
  return o;
}

TwoModeSweepResult sweep_two_mode(const TwoModeSweepRequest& request) {
  if (request.base.size() != 2) throw ValidationError("oscillators", "two-mode sweep needs exactly two oscillators");
  if (request.delta_ratios.empty() || request.cooperativities.empty()) {
    throw ValidationError("axes", "sweep axes must be non-empty");
  }
  const std::size_t nd = request.delta_ratios.size();
  const std::size_t nc = request.cooperativities.size();
  TwoModeSweepResult out;
  out.points.resize(nd * nc);
  parallel_for(nd * nc, request.threads, [&](std::size_t idx) {
    out.points[idx] = two_mode_point(request.base, request.delta_ratios[idx / nc],
                                     request.cooperativities[idx % nc], request.gls);
  });
  out.optimum.resize(nd);
  parallel_for(nd, request.threads, [&](std::size_t d) {
    std::vector<TwoModePoint> row(out.points.begin() + static_cast<std::ptrdiff_t>(d * nc),
                                  out.points.begin() + static_cast<std::ptrdiff_t>((d + 1) * nc));
    if (request.refine) {
      out.optimum[d] = two_mode_optimum(request.base, request.delta_ratios[d], request.cooperativities.front(),
                                        request.cooperativities.back(), request.gls, row);
    } else {
      TwoModeOptimum o;
      o.delta_ratio = request.delta_ratios[d];
      o.c_formula = 0.5 * o.delta_ratio;
      std::size_t best = nc;
      for (std::size_t j = 0; j < nc; ++j) {
        if (row[j].error.empty() && (best == nc || row[j].dn_gls < row[best].dn_gls)) best = j;
      }
      if (best == nc) {
        o.error = "no valid cooperativity point";
      } else {
        o.c_opt = row[best].c;
        o.dn = row[best].dn_gls;
        o.cross_error = row[best].cross_gls;
      }
      out.optimum[d] = o;
    }
  });
  return out;
}

}  // namespace optoretro
