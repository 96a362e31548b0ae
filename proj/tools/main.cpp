#include "commands.hpp"
#include "common.hpp"

#include "optoretro/types.hpp"
#include "optoretro/version.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>

int main(int argc, char** argv) {
  cli::set_command_line(argc, argv);
  CLI::App app{"Simulate homodyne records of multi-mode optomechanical systems and retrodict their initial states."};
  app.set_version_flag("--version", optoretro::kVersion);
  app.require_subcommand(1);

  int status = cli::kOk;
  cli::add_simulate(app, status);
  cli::add_retrodict(app, status);
  cli::add_psd(app, status);
  cli::add_sweep_sql(app, status);
  cli::add_sweep_two_mode(app, status);
  cli::add_validate_config(app, status);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kInvalidInput;
  } catch (const optoretro::ValidationError& e) {
    fmt::print(stderr, "error: invalid input: {}\n", e.what());
    return cli::kInvalidInput;
  } catch (const optoretro::IoError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kIoError;
  } catch (const optoretro::NumericalError& e) {
    fmt::print(stderr, "error: numerical failure: {}\n", e.what());
    return cli::kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return cli::kFailure;
  }
  return status;
}
