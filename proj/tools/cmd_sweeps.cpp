#include "commands.hpp"
#include "common.hpp"

#include "optoretro/sweeps.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <fstream>

namespace cli {

using optoretro::kTwoPi;

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& csv, const std::string& suffix) {
  auto p = csv;
  p.replace_filename(csv.stem().string() + suffix + csv.extension().string());
  return p;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw optoretro::IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw optoretro::IoError(fmt::format("write to '{}' failed", path.string()));
}

// Failed points keep their row with empty numeric cells and the error text.
std::string cell(double v, bool ok) { return ok ? num(v) : std::string(); }

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

void add_sweep_sql(CLI::App& app, int& status) {
  struct Opts {
    std::string config;
    double c_min = 0.1;
    double c_max = 100.0;
    double gamma_min = 1.0;
    double gamma_max = 1000.0;
    double per_decade = 40.0;
    std::size_t mc_shots = 0;
    std::uint64_t seed = 1;
    std::string out = "sweep_sql.csv";
    unsigned threads = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("sweep-sql", "Added noise of one oscillator over cooperativity and exponential filter rate");
  sub->add_option("--config", o->config, "Single-oscillator configuration (JSON, Hz units); its coupling is replaced by the swept cooperativity")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--c-min", o->c_min, "Smallest cooperativity")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--c-max", o->c_max, "Largest cooperativity")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--gamma-min", o->gamma_min, "Smallest filter rate in units of the damping rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--gamma-max", o->gamma_max, "Largest filter rate in units of the damping rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--per-decade", o->per_decade, "Log-grid points per decade on both axes")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--mc-shots", o->mc_shots, "Monte Carlo shots per cooperativity at the optimum (0 = off)")->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed for Monte Carlo checks")->capture_default_str();
  sub->add_option("--out", o->out, "Surface CSV; the optimum table goes to <stem>_optimum.csv")->capture_default_str();
  sub->add_option("--threads", o->threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  sub->callback([o, &status] {
    const auto cfg = load_validated(o->config);
    if (o->c_max < o->c_min || o->gamma_max < o->gamma_min) {
      throw optoretro::ValidationError("axes", "axis maximum below minimum");
    }
    if (o->mc_shots == 1) throw optoretro::ValidationError("mc-shots", "need 0 or at least 2 shots");
    optoretro::SqlSweepRequest request;
    request.base = cfg;
    request.cooperativities = optoretro::log_grid(o->c_min, o->c_max, o->per_decade);
    request.gamma_ratios = optoretro::log_grid(o->gamma_min, o->gamma_max, o->per_decade);
    request.mc_shots = o->mc_shots;
    request.seed = o->seed;
    request.threads = o->threads;
    const auto res = optoretro::sweep_single_sql(request);
    const double gam = cfg.modes()[0].gamma;
    bool failed = false;

    const std::filesystem::path surface_path(o->out);
    {
      auto out = open_csv(surface_path);
      out << "cooperativity,gamma_ratio,gamma_hz,dn,dn_thermal,dn_backaction,dn_shot,cond,error\n";
      for (const auto& p : res.surface) {
        const bool ok = p.error.empty();
        failed = failed || !ok;
        out << num(p.c) << ',' << num(p.gamma_ratio) << ',' << num(p.gamma_ratio * gam / kTwoPi) << ','
            << cell(p.dn, ok) << ',' << cell(p.dn_thermal, ok) << ',' << cell(p.dn_backaction, ok) << ','
            << cell(p.dn_shot, ok) << ',' << cell(p.cond, ok) << ',' << (ok ? "" : quoted(p.error)) << '\n';
      }
      check_written(out, surface_path);
    }
    const auto opt_path = with_suffix(surface_path, "_optimum");
    {
      auto out = open_csv(opt_path);
      out << "cooperativity,gamma_ratio,dn,gamma_ratio_grid,dn_grid,gamma_ratio_formula,dn_at_formula,dn_analytic,"
             "asymptote,mc_dn,mc_se,error\n";
      for (const auto& p : res.optimum) {
        const bool ok = p.error.empty();
        failed = failed || !ok;
        out << num(p.c) << ',' << cell(p.gamma_ratio, ok) << ',' << cell(p.dn, ok) << ',' << cell(p.gamma_ratio_grid, ok)
            << ',' << cell(p.dn_grid, ok) << ',' << cell(p.gamma_ratio_formula, ok) << ',' << cell(p.dn_at_formula, ok)
            << ',' << cell(p.dn_analytic, ok) << ',' << num(p.asymptote) << ','
            << (p.mc_dn ? num(*p.mc_dn) : "") << ',' << (p.mc_se ? num(*p.mc_se) : "") << ','
            << (ok ? "" : quoted(p.error)) << '\n';
      }
      check_written(out, opt_path);
    }
    nlohmann::json side;
    side["provenance"] = provenance("sweep-sql", &cfg.config(), o->seed, command_line());
    side["axes"] = {{"cooperativity", request.cooperativities}, {"gamma_ratio", request.gamma_ratios}};
    side["damping_rate_hz"] = gam / kTwoPi;
    side["optimum_table"] = opt_path.filename().string();
    write_json(side, sidecar_path(surface_path));
    write_json(side, sidecar_path(opt_path));
    if (failed) fmt::print(stderr, "warning: some sweep points failed; see the error column\n");
    status = failed ? kPartial : kOk;
  });
}

void add_sweep_two_mode(CLI::App& app, int& status) {
  struct Opts {
    std::string config;
    std::vector<double> deltas;
    double delta_min = 1.0;
    double delta_max = 100.0;
    double delta_per_decade = 5.0;
    double c_min = 0.05;
    double c_max = 200.0;
    double per_decade = 40.0;
    bool no_refine = false;
    std::size_t decimation = 0;
    std::string out = "sweep_two_mode.csv";
    unsigned threads = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("sweep-two-mode", "Two-oscillator added noise over detuning and common cooperativity");
  sub->add_option("--config", o->config, "Two-oscillator configuration (JSON, Hz units); oscillator 2 is retuned to omega_1 + delta")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--deltas", o->deltas, "Explicit detunings in units of the damping rate (overrides the log grid)")->delimiter(',');
  sub->add_option("--delta-min", o->delta_min, "Smallest detuning / damping rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--delta-max", o->delta_max, "Largest detuning / damping rate")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--delta-per-decade", o->delta_per_decade, "Detuning grid points per decade")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--c-min", o->c_min, "Smallest cooperativity")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--c-max", o->c_max, "Largest cooperativity")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--per-decade", o->per_decade, "Cooperativity grid points per decade")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_flag("--no-refine", o->no_refine, "Report the grid argmin without golden-section refinement");
  sub->add_option("--decimation", o->decimation, "GLS design decimation (0 = automatic)")->capture_default_str();
  sub->add_option("--out", o->out, "Point CSV; the optimum table goes to <stem>_optimum.csv")->capture_default_str();
  sub->add_option("--threads", o->threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  sub->callback([o, &status] {
    const auto cfg = load_validated(o->config);
    if (o->c_max < o->c_min || o->delta_max < o->delta_min) {
      throw optoretro::ValidationError("axes", "axis maximum below minimum");
    }
    optoretro::TwoModeSweepRequest request;
    request.base = cfg;
    request.delta_ratios = o->deltas.empty() ? optoretro::log_grid(o->delta_min, o->delta_max, o->delta_per_decade) : o->deltas;
    for (double d : request.delta_ratios) {
      if (!(d > 0.0)) throw optoretro::ValidationError("deltas", "detunings must be positive");
    }
    request.cooperativities = optoretro::log_grid(o->c_min, o->c_max, o->per_decade);
    request.gls.decimation = o->decimation;
    request.refine = !o->no_refine;
    request.threads = o->threads;
    const auto res = optoretro::sweep_two_mode(request);
    const double gam = cfg.modes()[0].gamma;
    bool failed = false;

    const std::filesystem::path points_path(o->out);
    {
      auto out = open_csv(points_path);
      out << "delta_ratio,delta_hz,cooperativity,dn_gls,dn_exp,cross_gls,cross_exp,cond_gls,cond_exp,error\n";
      for (const auto& p : res.points) {
        const bool ok = p.error.empty();
        failed = failed || !ok;
        out << num(p.delta_ratio) << ',' << num(p.delta_ratio * gam / kTwoPi) << ',' << num(p.c) << ','
            << cell(p.dn_gls, ok) << ',' << cell(p.dn_exp, ok) << ',' << cell(p.cross_gls, ok) << ','
            << cell(p.cross_exp, ok) << ',' << cell(p.cond_gls, ok) << ',' << cell(p.cond_exp, ok) << ','
            << (ok ? "" : quoted(p.error)) << '\n';
      }
      check_written(out, points_path);
    }
    const auto opt_path = with_suffix(points_path, "_optimum");
    {
      auto out = open_csv(opt_path);
      out << "delta_ratio,c_opt,c_formula,dn,cross_error,error\n";
      for (const auto& p : res.optimum) {
        const bool ok = p.error.empty();
        failed = failed || !ok;
        out << num(p.delta_ratio) << ',' << cell(p.c_opt, ok) << ',' << num(p.c_formula) << ',' << cell(p.dn, ok) << ','
            << cell(p.cross_error, ok) << ',' << (ok ? "" : quoted(p.error)) << '\n';
      }
      check_written(out, opt_path);
    }
    nlohmann::json side;
    side["provenance"] = provenance("sweep-two-mode", &cfg.config(), std::nullopt, command_line());
    side["axes"] = {{"delta_ratio", request.delta_ratios}, {"cooperativity", request.cooperativities}};
    side["damping_rate_hz"] = gam / kTwoPi;
    side["optimum_table"] = opt_path.filename().string();
    write_json(side, sidecar_path(points_path));
    write_json(side, sidecar_path(opt_path));
    if (failed) fmt::print(stderr, "warning: some sweep points failed; see the error column\n");
    status = failed ? kPartial : kOk;
  });
}

}  // namespace cli
