#include "common.hpp"

#include "optoretro/config_io.hpp"
#include "optoretro/version.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>

#include <fstream>

namespace cli {

namespace {
std::vector<std::string> g_argv;
}

optoretro::ValidatedConfig load_validated(const std::filesystem::path& path) {
  return optoretro::validate(optoretro::load_config(path));
}

nlohmann::json provenance(const std::string& command, const optoretro::SystemConfig* config,
                          std::optional<std::uint64_t> seed, const std::vector<std::string>& argv) {
  nlohmann::json p;
  p["command"] = command;
  p["argv"] = argv;
  p["versions"] = {
      {"optoretro", optoretro::kVersion},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                    NLOHMANN_JSON_VERSION_PATCH)},
      {"fmt", fmt::format("{}", FMT_VERSION)},
      {"cli11", CLI11_VERSION},
  };
  if (config) {
    p["config_hash"] = optoretro::hash_hex(optoretro::config_hash(*config));
    p["config"] = optoretro::config_to_json(*config);
  }
  if (seed) p["seed"] = *seed;
  return p;
}

void write_json(const nlohmann::json& doc, const std::filesystem::path& path) {
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw optoretro::IoError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw optoretro::IoError("write to " + path.string() + " failed");
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  return std::filesystem::path(csv.string() + ".json");
}

std::string num(double v) { return fmt::format("{}", v); }

void ensure_parent(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

const std::vector<std::string>& command_line() { return g_argv; }

void set_command_line(int argc, char** argv) { g_argv.assign(argv, argv + argc); }

}  // namespace cli
