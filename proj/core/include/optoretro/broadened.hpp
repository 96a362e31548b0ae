#pragma once

#include "optoretro/filters.hpp"
#include "optoretro/noise_statistics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace optoretro {

struct BroadenedOptions {
  std::size_t n_omega = 512;
  std::uint64_t seed = 0x62726F6164656EULL;  ///< fixed internal seed for frequency draws
};

/// Second-moment inversion under shot-to-shot frequency noise.
///
/// The raw outputs obey <q q^T> = E[J (x) J] vec<Q Q^T> + T' + B' + M', with
/// every expectation taken over the frequency distribution. The expectations
/// are estimated from n_omega draws using the exact kernels per draw, and
/// the (2N)^2 system is solved by weighted least squares over the symmetric
/// unknowns, weights combining sampling and Monte Carlo variances.
struct BroadenedMoments {
  Mat second_moments;  ///< inferred <Q Q^T>
  Mat second_moments_se;
  Vec mean;            ///< <J>^{-1} <q>
  Mat cov;             ///< second_moments - mean mean^T
  Mat mean_J;
  Mat M_primed;
  Mat T_primed;
  Mat B_primed;
  double smallest_singular_value = 0.0;
  std::vector<std::string> warnings;
};

BroadenedMoments broadened_second_moments(const ValidatedConfig& config, const FilterBank& bank,
                                          const std::vector<Vec>& raw_outputs,
                                          const BroadenedOptions& options = {});

}  // namespace optoretro
