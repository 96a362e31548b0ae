#include "fixtures.hpp"

#include "optoretro/simulator.hpp"

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace optoretro;

namespace {

ModeModel bare_mode(double omega, double gamma) {
  ModeModel m;
  m.omega = omega;
  m.gamma = gamma;
  return m;
}

// Drift matrix of the quadrature equations of motion.
Mat drift(const std::vector<ModeModel>& modes) {
  const auto dim = static_cast<Eigen::Index>(2 * modes.size());
  Mat a = Mat::Zero(dim, dim);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(2 * i);
    a(k, k) = -0.5 * modes[i].gamma;
    a(k + 1, k + 1) = -0.5 * modes[i].gamma;
    a(k, k + 1) = modes[i].omega;
    a(k + 1, k) = -modes[i].omega;
  }
  return a;
}

// Solves A S + S A^T + D = 0 through the Kronecker form.
Mat lyapunov(const Mat& a, const Mat& d) {
  const auto n = a.rows();
  const Mat id = Mat::Identity(n, n);
  Mat k = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += a(i, j) * id;
      k.block(i * n, j * n, n, n) += (i == j ? 1.0 : 0.0) * a;
    }
  Vec rhs(n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) rhs[i * n + j] = -d(i, j);
  const Vec s = k.fullPivLu().solve(rhs);
  Mat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = s[i * n + j];
  return out;
}

}  // namespace

TEST(Simulator, FreeEvolutionIsExact) {
  const std::vector<ModeModel> modes{bare_mode(kTwoPi * 125e3, kTwoPi * 2e3), bare_mode(-kTwoPi * 135e3, 0.0)};
  const double dt = 2e-7;
  const Propagator prop(modes, dt);
  Rng rng(1);
  Vec x(4);
  x << 1.3, -0.4, 0.2, 2.0;
  const Vec x0 = x;
  const int steps = 10000;
  for (int n = 0; n < steps; ++n) prop.step(x, rng);
  const double t = steps * dt;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = modes[i];
    const double e = std::exp(-0.5 * m.gamma * t);
    const double c = std::cos(m.omega * t);
    const double s = std::sin(m.omega * t);
    const auto k = static_cast<Eigen::Index>(2 * i);
    EXPECT_NEAR(x[k], e * (c * x0[k] + s * x0[k + 1]), 1e-11);
    EXPECT_NEAR(x[k + 1], e * (-s * x0[k] + c * x0[k + 1]), 1e-11);
  }
  // One step agrees with the matrix exponential of the drift to rounding.
  const Mat expected = (drift(modes) * dt).exp();
  EXPECT_LT((prop.transition() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Simulator, IncrementCovarianceMatchesQuadratureOracle) {
  const auto cfg = fixtures::make_config({fixtures::oscillator(125e3, 2e3, 1.0), fixtures::oscillator(-140e3, 3e3, 0.5)},
                                         {5.3, 2.0}, 5e6, 1e-4);
  const double dt = 2e-6;  // longer than the simulation step so the rotation matters
  const Propagator prop(cfg.modes(), dt);
  const Mat d = diffusion_matrix(cfg.modes());
  const Mat a = drift(cfg.modes());
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double oracle = fixtures::integrate(
          [&](double s) {
            const Mat e = (a * s).exp();
            return (e * d * e.transpose())(i, j);
          },
          0.0, dt);
      EXPECT_NEAR(prop.increment_cov()(i, j), oracle, 1e-12 * d.norm() * dt) << i << "," << j;
    }
  }
}

TEST(Simulator, DiffusionMatrixSharesBackactionKick) {
  const auto cfg = fixtures::make_config({fixtures::oscillator(125e3, 2e3, 1.0), fixtures::oscillator(135e3, 2e3, 0.0)},
                                         {4.0, 1.0}, 5e6, 1e-4);
  const Mat d = diffusion_matrix(cfg.modes());
  const double g = cfg.modes()[0].gamma;
  EXPECT_NEAR(d(0, 0), 1.5 * g, 1e-9);
  EXPECT_NEAR(d(1, 1), 1.5 * g + 4.0 * g, 1e-6);
  EXPECT_NEAR(d(3, 3), 0.5 * g + 1.0 * g, 1e-6);
  EXPECT_NEAR(d(1, 3), std::sqrt(4.0 * 1.0) * g, 1e-6);
  EXPECT_EQ(d(0, 1), 0.0);
}

TEST(Simulator, StationaryCovarianceMatchesLyapunovSolution) {
  const auto cfg = fixtures::make_config({fixtures::oscillator(125e3, 2e3, 1.0), fixtures::oscillator(131e3, 2.5e3, 0.3)},
                                         {5.3, 2.0}, 5e6, 1e-4);
  const Mat a = drift(cfg.modes());
  const Mat d = diffusion_matrix(cfg.modes());
  const Mat oracle = lyapunov(a, d);
  const Propagator prop(cfg.modes(), 1e-6);
  Mat s = Mat::Zero(4, 4);
  for (int n = 0; n < 200000; ++n) s = prop.transition() * s * prop.transition().transpose() + prop.increment_cov();
  EXPECT_LT((s - oracle).cwiseAbs().maxCoeff(), 1e-8 * oracle.norm());
  // Single-mode closed form: each oscillator relaxes to nu + 1/2 + C/2 on average.
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& m = cfg.modes()[i];
    const auto k = static_cast<Eigen::Index>(2 * i);
    EXPECT_NEAR(0.5 * (oracle(k, k) + oracle(k + 1, k + 1)), m.nu + 0.5 + 0.5 * *m.cooperativity, 1e-9);
  }
}

TEST(Simulator, EnsembleCovarianceFollowsMomentEquations) {
  const auto cfg = fixtures::make_config({fixtures::oscillator(125e3, 2e3, 1.0)}, {3.0}, 5e6, 4e-5);
  const auto state = single_mode_squeezed(Complex(0.6, 0.0), Complex(0.5, 0.2));
  const std::size_t n = 20000;
  const auto ens = run_ensemble(cfg, state, n, 11, 1);
  // Propagate the first and second moments through the exact discrete map.
  const Propagator prop(cfg.modes(), cfg.grid().dt());
  Vec mu = state.mean;
  Mat s = state.cov;
  for (std::size_t k = 1; k < cfg.grid().nt(); ++k) {
    mu = prop.transition() * mu;
    s = prop.transition() * s * prop.transition().transpose() + prop.increment_cov();
  }
  // Last sample: readout weights sqrt(2) g_eff (cos phi, -sin phi).
  const auto& m = cfg.modes()[0];
  Vec w(2);
  w << std::sqrt(2.0) * m.g_eff * std::cos(m.phi), -std::sqrt(2.0) * m.g_eff * std::sin(m.phi);
  const double mean_model = w.dot(mu);
  const double var_model = w.dot(s * w) + cfg.shot_noise_psd() * cfg.grid().fs();
  double sum = 0.0, sq = 0.0;
  for (const auto& r : ens.records) {
    const double v = r.samples[r.samples.size() - 1];
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = (sq - n * mean * mean) / (n - 1);
  EXPECT_NEAR(mean, mean_model, 5.0 * std::sqrt(var_model / n));
  EXPECT_NEAR(var, var_model, 5.0 * var_model * std::sqrt(2.0 / (n - 1)));
  // Initial points are distributed as the requested state.
  double x2 = 0.0;
  for (const auto& p : ens.initial_points) x2 += (p[0] - state.mean[0]) * (p[0] - state.mean[0]);
  EXPECT_NEAR(x2 / n, state.cov(0, 0), 5.0 * state.cov(0, 0) * std::sqrt(2.0 / n));
}

TEST(Simulator, ShotNoiseFloor) {
  const auto cfg = fixtures::single(1.0, 0.0, 2e-3);
  TrajectorySet traj{cfg.grid(), Mat::Zero(2, static_cast<Eigen::Index>(cfg.grid().nt()))};
  Rng rng(5);
  const auto rec = synthesize_signal(cfg, traj, rng);
  const double var = rec.samples.squaredNorm() / static_cast<double>(rec.samples.size());
  const double expected = cfg.shot_noise_psd() * cfg.grid().fs();
  EXPECT_NEAR(var, expected, 5.0 * expected * std::sqrt(2.0 / rec.samples.size()));
}

TEST(Simulator, ResultsIndependentOfThreadCount) {
  const auto cfg = fixtures::single(3.0, 1.0, 1e-4);
  const auto st = thermal_state(std::vector<double>{1.0});
  const auto a = run_ensemble(cfg, st, 37, 99, 1);
  const auto b = run_ensemble(cfg, st, 37, 99, 4);
  for (std::size_t i = 0; i < 37; ++i) {
    EXPECT_EQ(a.records[i].samples, b.records[i].samples);
    EXPECT_EQ(a.records[i].seed, shot_seed(99, i));
  }
  const auto c = run_ensemble(cfg, st, 37, 100, 1);
  EXPECT_NE(a.records[0].samples, c.records[0].samples);
}

TEST(Simulator, FrequencyNoiseDraws) {
  auto osc = fixtures::oscillator(125e3, 2e3, 0.0);
  osc.sigma = kTwoPi * 500.0;
  const auto cfg = fixtures::make_config({osc}, {1.0}, 5e6, 1e-4);
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double w = sample_frequencies(cfg, rng)[0] - osc.omega;
    sum += w;
    sq += w * w;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 * osc.sigma / std::sqrt(n));
  EXPECT_NEAR(std::sqrt(sq / n), osc.sigma, 0.02 * osc.sigma);
}

TEST(Simulator, RejectsTinyEnsembles) {
  const auto cfg = fixtures::single(1.0, 0.0, 1e-4);
  EXPECT_THROW(run_ensemble(cfg, thermal_state(std::vector<double>{0.0}), 1, 1), Error);
}
