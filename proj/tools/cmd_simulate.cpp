#include "commands.hpp"
#include "common.hpp"
#include "state_arg.hpp"

#include "optoretro/record_io.hpp"
#include "optoretro/simulator.hpp"

#include <fmt/format.h>

#include <cstdio>

namespace cli {

void add_simulate(CLI::App& app, int& status) {
  struct Opts {
    std::string config;
    std::string state = "thermal";
    std::size_t shots = 100;
    std::uint64_t seed = 1;
    std::string out = "records.hrec";
    unsigned threads = 0;
  };
  auto opts = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("simulate", "Synthesize an ensemble of homodyne records");
  sub->add_option("--config", opts->config, "Configuration file (JSON, Hz units)")->required()->check(CLI::ExistingFile);
  sub->add_option("--state", opts->state, "Initial state: thermal[:nu=..], vacuum, squeezed:db=..[,theta=..][,alpha=..], tmss:z=.., file:path")
      ->capture_default_str();
  sub->add_option("--shots", opts->shots, "Number of records")->capture_default_str()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
  sub->add_option("--seed", opts->seed, "Master seed")->capture_default_str();
  sub->add_option("--out", opts->out, "Output file; .csv for text, anything else for the binary container")->capture_default_str();
  sub->add_option("--threads", opts->threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  sub->callback([opts, &status] {
    const auto cfg = load_validated(opts->config);
    for (const auto& w : cfg.warnings()) fmt::print(stderr, "warning: {}\n", w);
    const auto state = parse_state(opts->state, cfg);
    auto ens = optoretro::run_ensemble(cfg, state, opts->shots, opts->seed, opts->threads);
    optoretro::RecordSet set;
    set.fs = cfg.grid().fs();
    set.records = std::move(ens.records);
    ensure_parent(opts->out);
    optoretro::write_records(set, opts->out);

    nlohmann::json side;
    side["provenance"] = provenance("simulate", &cfg.config(), opts->seed, command_line());
    side["state"] = optoretro::state_to_json(state);
    side["state_arg"] = opts->state;
    side["shots"] = opts->shots;
    side["samples_per_record"] = cfg.grid().nt();
    side["shot_noise_psd"] = cfg.shot_noise_psd();
    write_json(side, sidecar_path(opts->out));
    status = kOk;
  });
}

}  // namespace cli
