#include "optoretro/config_io.hpp"

#include <fmt/format.h>

#include <fstream>

namespace optoretro {

using nlohmann::json;

namespace {

double number(const json& obj, const char* section, const char* key) {
  if (!obj.contains(key)) throw ValidationError(fmt::format("{}.{}", section, key), "missing");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(fmt::format("{}.{}", section, key), "must be a number");
  return v.get<double>();
}

double number_or(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) throw ValidationError(key, "must be a number");
  return obj.at(key).get<double>();
}

}  // namespace

SystemConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("config", "document must be a JSON object");
  for (const char* section : {"cavity", "oscillators", "grid"}) {
    if (!doc.contains(section)) throw ValidationError(section, "missing section");
  }

  SystemConfig cfg;
  const auto& cav = doc.at("cavity");
  cfg.cavity.kappa = number(cav, "cavity", "kappa_hz") * kTwoPi;
  cfg.cavity.nbar = number(cav, "cavity", "nbar");
  cfg.cavity.epsilon = number_or(cav, "epsilon", 1.0);
  if (cav.contains("detuning_hz") && number(cav, "cavity", "detuning_hz") != 0.0) {
    throw ValidationError("cavity.detuning_hz", "only a resonantly driven cavity is modelled");
  }

  const auto& oscs = doc.at("oscillators");
  if (!oscs.is_array()) throw ValidationError("oscillators", "must be an array");
  for (std::size_t i = 0; i < oscs.size(); ++i) {
    const auto& o = oscs[i];
    const auto section = fmt::format("oscillators[{}]", i);
    OscillatorParams p;
    p.omega = number(o, section.c_str(), "omega_hz") * kTwoPi;
    p.gamma = number(o, section.c_str(), "gamma_hz") * kTwoPi;
    p.nu = number_or(o, "nu", 0.0);
    p.sigma = number_or(o, "sigma_hz", 0.0) * kTwoPi;
    p.extra_diffusion = number_or(o, "extra_diffusion_hz", 0.0) * kTwoPi;
    const bool has_g = o.contains("g_hz");
    const bool has_c = o.contains("cooperativity");
    if (has_g == has_c) {
      throw ValidationError(section, "give exactly one of g_hz or cooperativity");
    }
    if (has_g) {
      p.g = number(o, section.c_str(), "g_hz") * kTwoPi;
    } else {
      p.g = coupling_for_cooperativity(number(o, section.c_str(), "cooperativity"), p, cfg.cavity);
    }
    cfg.oscillators.push_back(p);
  }

  const auto& grid = doc.at("grid");
  cfg.grid = SamplingGrid(number(grid, "grid", "fs_hz"), number(grid, "grid", "tf_s"));
  return cfg;
}

json config_to_json(const SystemConfig& cfg) {
  json doc;
  doc["cavity"] = {{"kappa_hz", cfg.cavity.kappa / kTwoPi},
                   {"nbar", cfg.cavity.nbar},
                   {"epsilon", cfg.cavity.epsilon}};
  json oscs = json::array();
  for (const auto& o : cfg.oscillators) {
    oscs.push_back({{"omega_hz", o.omega / kTwoPi},
                    {"gamma_hz", o.gamma / kTwoPi},
                    {"g_hz", o.g / kTwoPi},
                    {"nu", o.nu},
                    {"sigma_hz", o.sigma / kTwoPi},
                    {"extra_diffusion_hz", o.extra_diffusion / kTwoPi}});
  }
  doc["oscillators"] = oscs;
  doc["grid"] = {{"fs_hz", cfg.grid.fs()}, {"tf_s", cfg.grid.tf()}};
  return doc;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config file '{}'", path.string()));
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("config", fmt::format("file '{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return config_from_json(doc);
}

std::uint64_t config_hash(const SystemConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

}  // namespace optoretro
