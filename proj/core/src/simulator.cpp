#include "optoretro/simulator.hpp"

#include "optoretro/parallel.hpp"
#include "quadrature.hpp"

#include <fmt/format.h>

#include <cmath>

namespace optoretro {

std::vector<double> sample_frequencies(const ValidatedConfig& config, Rng& rng) {
  std::vector<double> out;
  std::normal_distribution<double> normal;
  for (const auto& m : config.modes()) {
    out.push_back(m.sigma > 0.0 ? m.omega + m.sigma * normal(rng) : m.omega);
  }
  return out;
}

Mat diffusion_matrix(const std::vector<ModeModel>& modes) {
  const auto dim = static_cast<Eigen::Index>(2 * modes.size());
  Mat d = Mat::Zero(dim, dim);
  Vec kick = Vec::Zero(dim);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    d(2 * i, 2 * i) = modes[i].thermal_rate;
    d(2 * i + 1, 2 * i + 1) = modes[i].thermal_rate;
    kick[2 * i + 1] = modes[i].backaction_coupling;
  }
  // The shared amplitude noise has symmetrized density 1/2.
  d += 0.5 * kick * kick.transpose();
  return d;
}

namespace {

Mat transition_at(const std::vector<ModeModel>& modes, double s) {
  const auto dim = static_cast<Eigen::Index>(2 * modes.size());
  Mat t = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const double e = std::exp(-0.5 * modes[i].gamma * s);
    const double c = std::cos(modes[i].omega * s);
    const double sn = std::sin(modes[i].omega * s);
    const auto k = static_cast<Eigen::Index>(2 * i);
    t(k, k) = e * c;
    t(k, k + 1) = e * sn;
    t(k + 1, k) = -e * sn;
    t(k + 1, k + 1) = e * c;
  }
  return t;
}

}  // namespace

Propagator::Propagator(const std::vector<ModeModel>& modes, double dt) {
  transition_ = transition_at(modes, dt);
  const Mat d = diffusion_matrix(modes);
  const auto dim = d.rows();
  increment_cov_ = Mat::Zero(dim, dim);
  static const auto rule = detail::gauss_legendre(16);
  for (std::size_t q = 0; q < rule.first.size(); ++q) {
    const Mat e = transition_at(modes, rule.first[q] * dt);
    increment_cov_ += rule.second[q] * dt * (e * d * e.transpose());
  }
  increment_cov_ = 0.5 * (increment_cov_ + increment_cov_.transpose());
  if (d.isZero(0.0)) {
    noiseless_ = true;
    factor_ = Mat::Zero(dim, dim);
    return;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(increment_cov_);
  const Vec lambda = es.eigenvalues().cwiseMax(0.0);
  factor_ = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

void Propagator::step(Vec& state, Rng& rng) const {
  Vec next = transition_ * state;
  if (!noiseless_) {
    std::normal_distribution<double> normal;
    Vec z(state.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    next.noalias() += factor_ * z;
  }
  state = std::move(next);
}

namespace {

std::vector<ModeModel> realized_modes(const ValidatedConfig& config,
                                      const std::vector<double>& omega_realized) {
  std::vector<ModeModel> modes = config.modes();
  if (omega_realized.empty()) return modes;
  if (omega_realized.size() != modes.size()) {
    throw Error("omega_realized must have one entry per oscillator");
  }
  for (std::size_t i = 0; i < modes.size(); ++i) modes[i] = modes[i].with_omega(omega_realized[i]);
  return modes;
}

void check_initial(const ValidatedConfig& config, const Vec& initial) {
  if (static_cast<std::size_t>(initial.size()) != config.dim()) {
    throw Error(fmt::format("initial point has {} entries, expected {}", initial.size(), config.dim()));
  }
}

// Fills `signal` with the noiseless readout of `state` through time, and
// advances `state`. Kept separate from the shot-noise draw so the two
// streams never interleave.
void integrate_readout(const std::vector<ModeModel>& modes, const SamplingGrid& grid,
                       Vec state, Rng& process, Vec& signal, Mat* quads) {
  const Propagator prop(modes, grid.dt());
  Vec weights = Vec::Zero(state.size());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    weights[2 * i] = std::sqrt(2.0) * modes[i].g_eff * std::cos(modes[i].phi);
    weights[2 * i + 1] = -std::sqrt(2.0) * modes[i].g_eff * std::sin(modes[i].phi);
  }
  const auto nt = static_cast<Eigen::Index>(grid.nt());
  signal.resize(nt);
  if (quads) quads->resize(state.size(), nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    if (n > 0) prop.step(state, process);
    signal[n] = weights.dot(state);
    if (quads) quads->col(n) = state;
  }
}

void add_shot_noise(const ValidatedConfig& config, Vec& signal, Rng& rng) {
  const double psd = config.shot_noise_psd();
  if (!std::isfinite(psd)) throw ValidationError("cavity.nbar", "no probe light: infinite shot noise");
  const double scale = std::sqrt(psd * config.grid().fs());
  std::normal_distribution<double> normal;
  for (Eigen::Index n = 0; n < signal.size(); ++n) signal[n] += scale * normal(rng);
}

}  // namespace

TrajectorySet simulate_trajectory(const ValidatedConfig& config, const Vec& initial, Rng& rng,
                                  const std::vector<double>& omega_realized) {
  check_initial(config, initial);
  TrajectorySet traj{config.grid(), Mat()};
  Vec signal;
  integrate_readout(realized_modes(config, omega_realized), config.grid(), initial, rng, signal,
                    &traj.quads);
  return traj;
}

HomodyneRecord synthesize_signal(const ValidatedConfig& config, const TrajectorySet& traj,
                                 Rng& rng) {
  if (!(traj.grid == config.grid())) throw Error("trajectory grid does not match config grid");
  HomodyneRecord rec;
  rec.samples = Vec::Zero(traj.quads.cols());
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& m = config.modes()[i];
    const auto k = static_cast<Eigen::Index>(2 * i);
    rec.samples += std::sqrt(2.0) * m.g_eff *
                   (std::cos(m.phi) * traj.quads.row(k) - std::sin(m.phi) * traj.quads.row(k + 1))
                       .transpose();
  }
  add_shot_noise(config, rec.samples, rng);
  for (const auto& m : config.modes()) rec.omega_realized.push_back(m.omega);
  return rec;
}

Shot simulate_shot(const ValidatedConfig& config, const GaussianSampler& sampler,
                   std::uint64_t seed) {
  Shot shot;
  Rng freq = make_stream(seed, Stream::Frequency);
  Rng init = make_stream(seed, Stream::InitialState);
  Rng process = make_stream(seed, Stream::Process);
  Rng noise = make_stream(seed, Stream::ShotNoise);

  shot.record.seed = seed;
  shot.record.omega_realized = sample_frequencies(config, freq);
  shot.initial = sampler(init);
  check_initial(config, shot.initial);
  integrate_readout(realized_modes(config, shot.record.omega_realized), config.grid(),
                    shot.initial, process, shot.record.samples, nullptr);
  add_shot_noise(config, shot.record.samples, noise);
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& m = config.modes()[i];
    if (std::abs(shot.record.omega_realized[i] - m.omega) > 6.0 * m.sigma + 1e-12 * std::abs(m.omega)) {
      throw NumericalError(fmt::format("realized frequency of oscillator {} is beyond 6 sigma", i));
    }
  }
  return shot;
}

void for_each_shot(const ValidatedConfig& config, const GaussianState& state, std::size_t n_s,
                   std::uint64_t master_seed,
                   const std::function<void(std::size_t, const Shot&)>& consume, unsigned threads) {
  if (n_s < 2) throw Error("an ensemble needs at least 2 shots");
  check_state(state, false);
  const GaussianSampler sampler(state);
  const std::size_t batch = std::max<std::size_t>(1, 4 * resolve_threads(threads));
  std::vector<Shot> shots(batch);
  for (std::size_t start = 0; start < n_s; start += batch) {
    const std::size_t count = std::min(batch, n_s - start);
    parallel_for(count, threads, [&](std::size_t j) {
      shots[j] = simulate_shot(config, sampler, shot_seed(master_seed, start + j));
    });
    for (std::size_t j = 0; j < count; ++j) consume(start + j, shots[j]);
  }
}

Ensemble run_ensemble(const ValidatedConfig& config, const GaussianState& state, std::size_t n_s,
                      std::uint64_t master_seed, unsigned threads) {
  Ensemble ens;
  ens.records.resize(n_s);
  ens.initial_points.resize(n_s);
  for_each_shot(
      config, state, n_s, master_seed,
      [&](std::size_t i, const Shot& shot) {
        ens.records[i] = shot.record;
        ens.initial_points[i] = shot.initial;
      },
      threads);
  return ens;
}

}  // namespace optoretro
