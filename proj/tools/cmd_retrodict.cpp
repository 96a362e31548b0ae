#include "commands.hpp"
#include "common.hpp"
#include "state_arg.hpp"

#include "optoretro/broadened.hpp"
#include "optoretro/filters.hpp"
#include "optoretro/noise_statistics.hpp"
#include "optoretro/record_io.hpp"
#include "optoretro/simulator.hpp"
#include "optoretro/sweeps.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cli {

using optoretro::kTwoPi;

namespace {

struct Opts {
  std::string config;
  std::string records;
  bool simulate = false;
  std::string state = "thermal";
  std::size_t shots = 1000;
  std::uint64_t seed = 1;
  std::string family = "gls";
  std::string gamma = "auto";
  std::string backaction = "exact";
  std::size_t decimation = 0;
  std::size_t bins = 50;
  std::string out_dir = "retrodict-out";
  unsigned threads = 0;
};

std::vector<double> parse_gammas(const std::string& text, const optoretro::ValidatedConfig& cfg) {
  if (text == "auto") return optoretro::optimal_gammas(cfg);
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !(v > 0.0)) {
      throw optoretro::ValidationError("gamma", fmt::format("expected 'auto' or positive rates in Hz, got '{}'", item));
    }
    out.push_back(kTwoPi * v);
  }
  if (out.size() == 1 && cfg.size() > 1) out.assign(cfg.size(), out.front());
  if (out.size() != cfg.size()) {
    throw optoretro::ValidationError("gamma", fmt::format("need one rate per oscillator ({}), got {}", cfg.size(), out.size()));
  }
  return out;
}

optoretro::FilterBank build_bank(const Opts& o, const optoretro::ValidatedConfig& cfg) {
  using optoretro::FilterFamily;
  const FilterFamily family = optoretro::filter_family_from_string(o.family);
  if (family != FilterFamily::EXP && o.gamma != "auto") {
    throw optoretro::ValidationError("gamma", "--gamma only applies to the exp family");
  }
  switch (family) {
    case FilterFamily::OLS: return optoretro::ols_filters(cfg);
    case FilterFamily::EXP: return optoretro::exp_filters(cfg, parse_gammas(o.gamma, cfg));
    case FilterFamily::AVG: return optoretro::avg_filters(cfg);
    case FilterFamily::GLS: {
      optoretro::GlsOptions g;
      g.decimation = o.decimation;
      return optoretro::gls_filters(cfg, g);
    }
  }
  throw optoretro::Error("unreachable filter family");
}

std::vector<std::string> quad_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) {
    out.push_back(fmt::format("X{}", i));
    out.push_back(fmt::format("P{}", i));
  }
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw optoretro::IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

void write_sidecar(const std::filesystem::path& csv, const nlohmann::json& prov, const std::string& what,
                   const std::vector<std::string>& columns) {
  nlohmann::json side;
  side["provenance"] = prov;
  side["content"] = what;
  side["columns"] = columns;
  write_json(side, sidecar_path(csv));
}

void run(const Opts& o) {
  const auto cfg = load_validated(o.config);
  for (const auto& w : cfg.warnings()) fmt::print(stderr, "warning: {}\n", w);
  if (o.simulate == !o.records.empty()) {
    throw optoretro::ValidationError("records", "give exactly one of --records or --simulate");
  }
  const auto bank = build_bank(o, cfg);
  const std::size_t nt = cfg.grid().nt();
  const std::size_t bin = std::max<std::size_t>(1, nt / std::max<std::size_t>(1, o.bins));
  optoretro::MeanSquareAccumulator acc(nt, bin);

  bool broadened = false;
  for (const auto& m : cfg.modes()) broadened = broadened || m.sigma > 0.0;

  std::vector<optoretro::Vec> estimates;
  std::vector<optoretro::Vec> raw;
  std::vector<std::uint64_t> seeds;
  std::optional<optoretro::GaussianState> truth;
  const optoretro::Mat j = bank.J;
  const auto take = [&](const optoretro::HomodyneRecord& rec) {
    const optoretro::Vec q = optoretro::estimate(bank, rec);
    if (broadened) raw.push_back(j * q);
    estimates.push_back(q);
    seeds.push_back(rec.seed);
    acc.add(rec.samples);
  };

  if (o.simulate) {
    truth = parse_state(o.state, cfg);
    optoretro::for_each_shot(cfg, *truth, o.shots, o.seed,
                             [&](std::size_t, const optoretro::Shot& shot) { take(shot.record); }, o.threads);
  } else {
    const auto set = optoretro::read_records(o.records);
    if (std::abs(set.fs - cfg.grid().fs()) > 1e-9 * cfg.grid().fs()) {
      throw optoretro::ValidationError("records", fmt::format("record sample rate {} Hz differs from config {} Hz", set.fs, cfg.grid().fs()));
    }
    for (const auto& rec : set.records) {
      if (static_cast<std::size_t>(rec.samples.size()) != nt) {
        throw optoretro::ValidationError("records", fmt::format("record has {} samples, config grid has {}", rec.samples.size(), nt));
      }
      take(rec);
    }
  }
  if (estimates.size() < 2) throw optoretro::ValidationError("records", "need at least 2 records");

  const auto ba = o.backaction == "rwa" ? optoretro::BackactionModel::RotatingWave : optoretro::BackactionModel::Exact;
  const auto noise = optoretro::noise_covariances(cfg, bank, ba);
  const auto est = optoretro::sample_covariance(estimates);
  const auto inferred = optoretro::infer_state_cov(est, noise);

  optoretro::GaussianState inferred_state{est.mean, inferred.cov};
  const optoretro::Vec model = optoretro::mean_square_signal(cfg, inferred_state);
  const auto cmp = optoretro::compare_mean_square(model, acc, cfg.grid());

  const std::filesystem::path dir(o.out_dir);
  std::filesystem::create_directories(dir);
  const auto prov = provenance("retrodict", &cfg.config(), o.seed, command_line());
  const auto names = quad_names(cfg.size());

  {
    const auto path = dir / "estimates.csv";
    auto out = open_csv(path);
    std::vector<std::string> cols{"shot", "seed"};
    cols.insert(cols.end(), names.begin(), names.end());
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (std::size_t s = 0; s < estimates.size(); ++s) {
      out << s << ',' << seeds[s];
      for (Eigen::Index k = 0; k < estimates[s].size(); ++k) out << ',' << num(estimates[s][k]);
      out << '\n';
    }
    if (!out) throw optoretro::IoError(fmt::format("write to '{}' failed", path.string()));
    write_sidecar(path, prov, "normalized initial-quadrature estimates, one row per shot", cols);
  }
  {
    const auto path = dir / "mean_square.csv";
    auto out = open_csv(path);
    out << "time_s,model,empirical,se,z\n";
    for (Eigen::Index b = 0; b < cmp.model.size(); ++b) {
      out << num(cmp.time_s[static_cast<std::size_t>(b)]) << ',' << num(cmp.model[b]) << ',' << num(cmp.empirical[b])
          << ',' << num(cmp.se[b]) << ',' << num(cmp.z[b]) << '\n';
    }
    if (!out) throw optoretro::IoError(fmt::format("write to '{}' failed", path.string()));
    write_sidecar(path, prov, "binned mean-square signal, model from the inferred state versus ensemble average",
                  {"time_s", "model", "empirical", "se", "z"});
  }
  {
    const auto path = dir / "filters.csv";
    optoretro::write_bank_csv(bank, path);
    std::vector<std::string> cols{"time_s"};
    for (std::size_t r = 0; r < names.size(); ++r) cols.push_back(fmt::format("m{}", r));
    write_sidecar(path, prov, fmt::format("filter weight functions; row r targets {}", fmt::join(names, ",")), cols);
  }

  nlohmann::json report;
  report["provenance"] = prov;
  report["filters"] = optoretro::bank_to_json(bank);
  report["shots"] = estimates.size();
  report["sample_covariance"] = optoretro::covariance_estimate_to_json(est);
  report["noise"] = optoretro::noise_set_to_json(noise);
  report["inferred_state"] = optoretro::inferred_state_to_json(inferred);
  nlohmann::json occ = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    occ.push_back({{"oscillator", i + 1},
                   {"added", noise.added[static_cast<Eigen::Index>(i)]},
                   {"inferred_occupation", optoretro::block_occupation(inferred.cov, i) - 0.5},
                   {"inferred_occupation_se", optoretro::occupation_se(est.sigma, i, est.n_s)}});
  }
  report["occupations"] = occ;
  nlohmann::json cross = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    for (std::size_t k = i + 1; k < cfg.size(); ++k) {
      const auto c = optoretro::cross_error(noise, i, k);
      cross.push_back({{"i", i + 1}, {"j", k + 1}, {"re", c.real()}, {"im", c.imag()}, {"abs", std::abs(c)}});
    }
  }
  report["cross_error"] = cross;
  report["mean_square"] = {{"bins", cmp.model.size()}, {"samples_per_bin", bin}, {"max_abs_z", cmp.max_abs_z()}};
  if (broadened) {
    const auto bm = optoretro::broadened_second_moments(cfg, bank, raw);
    report["broadened"] = {{"second_moments", optoretro::matrix_to_json(bm.second_moments)},
                           {"second_moments_se", optoretro::matrix_to_json(bm.second_moments_se)},
                           {"cov", optoretro::matrix_to_json(bm.cov)},
                           {"smallest_singular_value", bm.smallest_singular_value},
                           {"warnings", bm.warnings}};
  }
  if (truth) report["true_state"] = optoretro::state_to_json(*truth);
  report["physical"] = inferred.physical;
  write_json(report, dir / "report.json");

  fmt::print("shots {}  family {}  cond(J) {:.3g}\n", estimates.size(), optoretro::to_string(bank.family), bank.cond);
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    fmt::print("oscillator {}: added {:.4f}  inferred occupation {:.4f}\n", i + 1,
               noise.added[static_cast<Eigen::Index>(i)], optoretro::block_occupation(inferred.cov, i) - 0.5);
  }
  fmt::print("mean-square max |z| {:.2f} over {} bins\n", cmp.max_abs_z(), cmp.model.size());
  fmt::print("physical: {}\n", inferred.physical ? "pass" : "fail");
  for (const auto& f : inferred.flags) fmt::print("flag: {}\n", f);
}

}  // namespace

void add_retrodict(CLI::App& app, int& status) {
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("retrodict", "Estimate initial quadratures from records and infer the initial state covariance");
  sub->add_option("--config", o->config, "Configuration file (JSON, Hz units)")->required()->check(CLI::ExistingFile);
  auto* rec = sub->add_option("--records", o->records, "Record file written by 'simulate'")->check(CLI::ExistingFile);
  auto* sim = sub->add_flag("--simulate", o->simulate, "Simulate the records in memory instead of reading them");
  rec->excludes(sim);
  sub->add_option("--state", o->state, "Initial state when simulating (see 'simulate --help')")->capture_default_str();
  sub->add_option("--shots", o->shots, "Shots when simulating")->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  sub->add_option("--seed", o->seed, "Master seed when simulating")->capture_default_str();
  sub->add_option("--family", o->family, "Filter family")->capture_default_str()->check(CLI::IsMember({"ols", "exp", "gls", "avg"}));
  sub->add_option("--gamma", o->gamma, "Exponential filter decay rates in Hz (comma list) or 'auto'")->capture_default_str();
  sub->add_option("--backaction", o->backaction, "Backaction kernel")->capture_default_str()->check(CLI::IsMember({"exact", "rwa"}));
  sub->add_option("--decimation", o->decimation, "GLS design decimation (0 = automatic)")->capture_default_str();
  sub->add_option("--bins", o->bins, "Number of time bins for the mean-square comparison")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--out-dir", o->out_dir, "Output directory")->capture_default_str();
  sub->add_option("--threads", o->threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  sub->callback([o, &status] {
    run(*o);
    status = kOk;
  });
}

}  // namespace cli
