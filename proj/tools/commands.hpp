#pragma once

#include <CLI11.hpp>

namespace cli {

// Each registers one subcommand. The callback stores its exit status in `status`.
void add_simulate(CLI::App& app, int& status);
void add_retrodict(CLI::App& app, int& status);
void add_psd(CLI::App& app, int& status);
void add_sweep_sql(CLI::App& app, int& status);
void add_sweep_two_mode(CLI::App& app, int& status);
void add_validate_config(CLI::App& app, int& status);

}  // namespace cli
