#pragma once

#include "optoretro/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kIoError = 3,
  kNumerical = 4,
  kPartial = 5,
};

/// Loads and validates a config file.
optoretro::ValidatedConfig load_validated(const std::filesystem::path& path);

/// Provenance block shared by every sidecar: tool and library versions,
/// config hash, seed and the command line that produced the output.
nlohmann::json provenance(const std::string& command, const optoretro::SystemConfig* config,
                          std::optional<std::uint64_t> seed,
                          const std::vector<std::string>& argv);

/// Writes `doc` pretty-printed with a trailing newline.
void write_json(const nlohmann::json& doc, const std::filesystem::path& path);

/// `<path>.json` next to a CSV output.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Shortest round-trip representation, stable across runs.
std::string num(double v);

void ensure_parent(const std::filesystem::path& path);

/// Arguments as given, kept for provenance.
const std::vector<std::string>& command_line();
void set_command_line(int argc, char** argv);

}  // namespace cli
