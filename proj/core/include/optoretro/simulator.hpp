#pragma once

#include "optoretro/gaussian_state.hpp"
#include "optoretro/model.hpp"
#include "optoretro/rng.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace optoretro {

/// Quadrature time series on a grid; row 2i is X_i, row 2i+1 is P_i.
struct TrajectorySet {
  SamplingGrid grid;
  Mat quads;

  std::size_t modes() const noexcept { return static_cast<std::size_t>(quads.rows() / 2); }
};

/// One simulated shot: the sampled signal and what produced it.
struct HomodyneRecord {
  Vec samples;
  std::uint64_t seed = 0;
  std::vector<double> omega_realized;
};

/// Per-oscillator frequencies for one shot, drawn from N(omega_i, sigma_i^2).
std::vector<double> sample_frequencies(const ValidatedConfig& config, Rng& rng);

/// Exact one-step propagation of the linear stochastic system.
///
/// The deterministic part is the rotation-decay map exp(A dt). The noise
/// increment is Gaussian with covariance int_0^dt exp(A s) D exp(A^T s) ds,
/// where D holds the per-quadrature diffusion rates and the shared
/// momentum kick, so the sampled process has exactly the continuous-time
/// statistics at the grid points.
class Propagator {
public:
  Propagator(const std::vector<ModeModel>& modes, double dt);

  void step(Vec& state, Rng& rng) const;

  const Mat& transition() const noexcept { return transition_; }
  const Mat& increment_cov() const noexcept { return increment_cov_; }

private:
  Mat transition_;
  Mat increment_cov_;
  Mat factor_;
  bool noiseless_ = false;
};

/// Diffusion matrix D of the quadrature vector (rates, per unit time).
Mat diffusion_matrix(const std::vector<ModeModel>& modes);

/// Integrates all oscillators from `initial` over the config grid.
/// `omega_realized`, if non-empty, replaces the nominal frequencies.
TrajectorySet simulate_trajectory(const ValidatedConfig& config, const Vec& initial, Rng& rng,
                                  const std::vector<double>& omega_realized = {});

/// S(t_n) = sqrt(2) sum_i g_eff,i (X_i cos phi_i - P_i sin phi_i) + sqrt(P_SN fs) z_n.
HomodyneRecord synthesize_signal(const ValidatedConfig& config, const TrajectorySet& traj,
                                 Rng& rng);

/// Simulates a complete shot from a per-shot seed (frequency draw, initial
/// sample, process and shot-noise streams all derived from it).
struct Shot {
  HomodyneRecord record;
  Vec initial;
};
Shot simulate_shot(const ValidatedConfig& config, const GaussianSampler& sampler,
                   std::uint64_t seed);

struct Ensemble {
  std::vector<HomodyneRecord> records;
  std::vector<Vec> initial_points;
};

/// Runs n_s independent shots. Shot i uses shot_seed(master_seed, i), so the
/// result is independent of the thread count.
Ensemble run_ensemble(const ValidatedConfig& config, const GaussianState& state, std::size_t n_s,
                      std::uint64_t master_seed, unsigned threads = 0);

/// Streaming variant for large ensembles: `consume` is called once per shot,
/// in index order, from the calling thread.
void for_each_shot(const ValidatedConfig& config, const GaussianState& state, std::size_t n_s,
                   std::uint64_t master_seed, const std::function<void(std::size_t, const Shot&)>& consume,
                   unsigned threads = 0);

}  // namespace optoretro
