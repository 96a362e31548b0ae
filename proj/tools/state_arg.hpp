#pragma once

#include "optoretro/gaussian_state.hpp"
#include "optoretro/model.hpp"

#include <string>

namespace cli {

// Initial-state descriptions accepted on the command line:
//
//   thermal                 bath occupation of every oscillator
//   thermal:nu=2            same occupation for every oscillator
//   vacuum
//   squeezed:db=-10[,theta=0][,alpha=1+2i]   first oscillator, others thermal
//   tmss:z=1.15i            first two oscillators, others thermal
//   file:state.json         mean and cov as written by state_to_json
optoretro::GaussianState parse_state(const std::string& text, const optoretro::ValidatedConfig& config);

/// Parses "1.5", "1.15i", "-2i", "0.3+1.2i", "1e-3-4i".
optoretro::Complex parse_complex(const std::string& text);

}  // namespace cli
