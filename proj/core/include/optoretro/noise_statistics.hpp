#pragma once

#include "optoretro/filters.hpp"
#include "optoretro/gaussian_state.hpp"
#include "optoretro/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace optoretro {

/// Noise second moments of the raw (unnormalized) filter outputs dt * m * S
/// for one realization of the oscillator frequencies.
struct RawNoise {
  Mat M;      ///< shot noise
  Mat T;      ///< thermal (plus extra) diffusion
  Mat B;      ///< backaction, exact momentum-drive kernel
  Mat B_rwa;  ///< backaction, rotating-wave approximation
};

/// Evaluates the diffusion integrals with an O(nt) backward recursion.
///
/// For tau in [t_j, t_j+1) the filter's response to a kick of oscillator k
/// is V_kj exp(a_k (tau - t_j)), where V_kj accumulates the filter weights
/// ahead of t_j. The tau integral of each product is then closed form, so
/// the result equals the continuous-tau double sum with the exact R kernels.
RawNoise raw_noise(const std::vector<ModeModel>& modes, double shot_noise_psd, const Mat& m,
                   const SamplingGrid& grid);

enum class BackactionModel { Exact, RotatingWave };

/// Bias covariances of the normalized estimates, in phonon-occupation units.
struct NoiseCovarianceSet {
  Mat M;
  Mat T;
  Mat B;
  bool primed = false;
  BackactionModel backaction = BackactionModel::Exact;
  Vec added;  ///< per-oscillator added occupation

  Mat total() const { return M + T + B; }
};

NoiseCovarianceSet noise_covariances(const ValidatedConfig& config, const FilterBank& bank,
                                     BackactionModel backaction = BackactionModel::Exact);

Mat shot_noise_cov(const ValidatedConfig& config, const FilterBank& bank);
Mat thermal_cov(const ValidatedConfig& config, const FilterBank& bank);
Mat backaction_cov(const ValidatedConfig& config, const FilterBank& bank, bool exact = true);

/// Half the trace of oscillator i's 2x2 block of `cov`.
double block_occupation(const Mat& cov, std::size_t i);
/// Half the trace of oscillator i's block of T + B + M.
double added_occupation(const NoiseCovarianceSet& set, std::size_t i);

/// <da_i^dag da_j> = 1/2 (1, -i) [T + B + M]_ij (1, i)^T.
Complex cross_error(const Mat& total, std::size_t i, std::size_t j);
inline Complex cross_error(const NoiseCovarianceSet& set, std::size_t i, std::size_t j) {
  return cross_error(set.total(), i, j);
}

/// Element-wise standard errors sqrt((S_ij^2 + S_ii S_jj) / (n_s - 1)).
Mat wishart_se(const Mat& sigma, std::size_t n_s);

struct CovarianceEstimate {
  Vec mean;
  Mat sigma;
  std::size_t n_s = 0;
  Mat se;
  /// Fewer than 10 dof per dimension: standard errors are unreliable.
  bool low_dof = false;

  std::size_t dof() const noexcept { return n_s > 0 ? n_s - 1 : 0; }
};

CovarianceEstimate sample_covariance(const std::vector<Vec>& samples);

struct InferredState {
  Mat cov;
  Mat se;
  Vec symplectic;
  bool physical = true;
  std::vector<std::string> flags;
};

/// cov[Q] = Sigma - T - B - M with Wishart standard errors. Unphysical
/// results are flagged, never clipped.
InferredState infer_state_cov(const CovarianceEstimate& estimate, const NoiseCovarianceSet& set);

/// Model <S^2(t_n)> for an initial state: coherent second moments evolved by
/// the signal response, white floor P_SN fs, and diffusion relaxation with
/// the exact backaction kernel. With frequency noise the coherent and
/// diffusion terms are averaged over n_omega draws (fixed internal seed).
Vec mean_square_signal(const ValidatedConfig& config, const GaussianState& state,
                       std::size_t n_omega = 512);

/// Running per-sample and per-bin statistics of S^2 over an ensemble.
class MeanSquareAccumulator {
public:
  MeanSquareAccumulator(std::size_t nt, std::size_t bin);

  void add(const Vec& samples);

  std::size_t count() const noexcept { return count_; }
  std::size_t bin() const noexcept { return bin_; }
  Vec mean() const;
  Vec bin_mean() const;
  /// Standard error of each bin mean across shots.
  Vec bin_se() const;

private:
  std::size_t nt_;
  std::size_t bin_;
  std::size_t count_ = 0;
  Vec sum_;
  Vec bin_sum_;
  Vec bin_sum_sq_;
};

struct MeanSquareComparison {
  std::vector<double> time_s;  ///< bin centers
  Vec model;
  Vec empirical;
  Vec se;
  Vec z;  ///< (empirical - model) / se
  double max_abs_z() const { return z.size() ? z.cwiseAbs().maxCoeff() : 0.0; }
};

MeanSquareComparison compare_mean_square(const Vec& model, const MeanSquareAccumulator& acc,
                                         const SamplingGrid& grid);

nlohmann::json matrix_to_json(const Mat& m);
nlohmann::json noise_set_to_json(const NoiseCovarianceSet& set);
nlohmann::json covariance_estimate_to_json(const CovarianceEstimate& est);
nlohmann::json inferred_state_to_json(const InferredState& st);

}  // namespace optoretro
