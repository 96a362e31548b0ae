#include "commands.hpp"
#include "common.hpp"

#include "optoretro/config_io.hpp"
#include "optoretro/filters.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <iostream>

namespace cli {

using optoretro::kTwoPi;

void add_validate_config(CLI::App& app, int& status) {
  struct Opts {
    std::string config;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("validate-config", "Check a configuration and print derived quantities as JSON");
  sub->add_option("--config", opts->config, "Configuration file (JSON, Hz units)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", opts->out, "Write the report here instead of stdout");
  sub->callback([opts, &status] {
    const auto cfg = load_validated(opts->config);
    nlohmann::json doc;
    doc["provenance"] = provenance("validate-config", &cfg.config(), std::nullopt, command_line());
    doc["shot_noise_psd"] = cfg.shot_noise_psd();
    doc["samples"] = cfg.grid().nt();
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : cfg.modes()) {
      nlohmann::json j;
      j["omega_hz"] = m.omega / kTwoPi;
      j["gamma_hz"] = m.gamma / kTwoPi;
      j["g_eff_hz"] = m.g_eff / kTwoPi;
      j["phase_delay_rad"] = m.phi;
      j["nu"] = m.nu;
      if (m.cooperativity) j["cooperativity"] = *m.cooperativity;
      j["gamma_opt_hz"] = optoretro::optimal_gamma(m, cfg.cavity().epsilon) / kTwoPi;
      modes.push_back(j);
    }
    doc["oscillators"] = modes;
    nlohmann::json res = nlohmann::json::array();
    for (const auto& r : cfg.resolution()) {
      res.push_back({{"i", r.i}, {"j", r.j}, {"separation_hz", r.separation / kTwoPi}, {"ratio", r.ratio}});
    }
    doc["resolution"] = res;
    doc["warnings"] = cfg.warnings();
    doc["gls_decimation"] = optoretro::auto_decimation(cfg);
    if (opts->out.empty()) {
      std::cout << doc.dump(2) << '\n';
    } else {
      write_json(doc, opts->out);
    }
    for (const auto& w : cfg.warnings()) fmt::print(stderr, "warning: {}\n", w);
    status = kOk;
  });
}

}  // namespace cli
