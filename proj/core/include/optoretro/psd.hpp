#pragma once

#include "optoretro/types.hpp"

#include <cstddef>
#include <vector>

namespace optoretro {

struct PsdEstimate {
  std::vector<double> frequency_hz;
  std::vector<double> psd;  ///< one-sided PSD divided by the one-sided shot-noise level 2 P_SN
  std::size_t segments = 0;
};

/// Welch average over all records: Hann window, 50% overlap, one-sided.
/// Normalized so that white noise of two-sided density P_SN reads 1.0.
PsdEstimate estimate_psd(const std::vector<Vec>& records, double fs, std::size_t segment_length,
                         double shot_noise_psd);

}  // namespace optoretro
