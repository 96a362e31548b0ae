#pragma once

#include "optoretro/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace optoretro {

// Configuration document layout (all frequencies in Hz, converted as value * 2pi):
//
//   {
//     "cavity":      {"kappa_hz": 5e6, "nbar": 1e4, "epsilon": 1.0},
//     "oscillators": [{"omega_hz": 125e3, "gamma_hz": 2e3, "g_hz": 1e3, "nu": 1,
//                      "sigma_hz": 0, "extra_diffusion_hz": 0}],
//     "grid":        {"fs_hz": 5e6, "tf_s": 2e-3}
//   }
//
// An oscillator may give "cooperativity" instead of "g_hz"; g is then
// back-solved from kappa and nbar. omega_hz may be negative.

SystemConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const SystemConfig& config);

SystemConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump; stable across runs and platforms.
std::uint64_t config_hash(const SystemConfig& config);
std::string hash_hex(std::uint64_t h);

}  // namespace optoretro
