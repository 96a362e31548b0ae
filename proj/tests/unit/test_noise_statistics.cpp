#include "fixtures.hpp"
#include "kernel_oracle.hpp"

#include "optoretro/filters.hpp"
#include "optoretro/noise_statistics.hpp"
#include "optoretro/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace optoretro;

namespace {

// Raw noise as the explicit double sum over sample pairs with quadrature kernels.
struct OracleNoise {
  Mat T, B, B_rwa;
};

OracleNoise oracle_noise(const std::vector<ModeModel>& modes, const Mat& m, const SamplingGrid& grid) {
  const auto k_dim = m.rows();
  const auto nt = m.cols();
  const double dt = grid.dt();
  OracleNoise out{Mat::Zero(k_dim, k_dim), Mat::Zero(k_dim, k_dim), Mat::Zero(k_dim, k_dim)};
  for (Eigen::Index n = 1; n < nt; ++n) {
    for (Eigen::Index p = 1; p <= n; ++p) {
      const double t = grid.time(static_cast<std::size_t>(n));
      const double tp = grid.time(static_cast<std::size_t>(p));
      // Each kernel is symmetric under (k, t) <-> (l, t'), so off-diagonal pairs count both orders.
      Mat outer = dt * dt * m.col(n) * m.col(p).transpose();
      if (p != n) outer += dt * dt * m.col(p) * m.col(n).transpose();
      for (std::size_t k = 0; k < modes.size(); ++k) {
        for (std::size_t l = 0; l < modes.size(); ++l) {
          const auto& a = modes[k];
          const auto& b = modes[l];
          const double gg = a.g_eff * b.g_eff;
          const double r = fixtures::oracle_R(a, b, t, tp);
          if (k == l) out.T += 2.0 * gg * a.thermal_rate * r * outer;
          const double bb = gg * a.backaction_coupling * b.backaction_coupling;
          out.B += bb * fixtures::oracle_momentum(a, b, t, tp) * outer;
          out.B_rwa += 0.5 * bb * r * outer;
        }
      }
    }
  }
  return out;
}

ValidatedConfig pair_config(double tf, double fs = 5e6) {
  return fixtures::make_config({fixtures::oscillator(125e3, 2e3, 1.0), fixtures::oscillator(-135e3, 3e3, 0.5)},
                               {5.3, 2.0}, fs, tf);
}

}  // namespace

TEST(NoiseStatistics, RawNoiseMatchesQuadratureDoubleSum) {
  const auto cfg = pair_config(4e-6);
  Rng rng(3);
  Mat m(4, static_cast<Eigen::Index>(cfg.grid().nt()));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = standard_normal(rng);
  const RawNoise raw = raw_noise(cfg.modes(), cfg.shot_noise_psd(), m, cfg.grid());
  const OracleNoise ref = oracle_noise(cfg.modes(), m, cfg.grid());
  const auto close = [](const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); };
  EXPECT_LT(close(raw.T, ref.T), 1e-9);
  EXPECT_LT(close(raw.B, ref.B), 1e-9);
  EXPECT_LT(close(raw.B_rwa, ref.B_rwa), 1e-9);
  EXPECT_LT(close(raw.M, cfg.shot_noise_psd() * cfg.grid().dt() * m * m.transpose()), 1e-14);
}

TEST(NoiseStatistics, RawNoiseEqualsFilteredNoiseMatrix) {
  // dt^2 m (Omega - white) m^T is the same quantity assembled from the sampled kernels.
  const auto cfg = pair_config(2e-4);
  const auto bank = exp_filters(cfg, optimal_gammas(cfg));
  const RawNoise raw = raw_noise(cfg.modes(), cfg.shot_noise_psd(), bank.m, cfg.grid());
  const double dt = cfg.grid().dt();
  const Mat total = dt * dt * bank.m * noise_matrix(cfg) * bank.m.transpose();
  const Mat mine = raw.T + raw.B + raw.M;
  EXPECT_LT((mine - total).cwiseAbs().maxCoeff(), 1e-8 * total.cwiseAbs().maxCoeff());
}

TEST(NoiseStatistics, NormalizedCovariancesUseTheInverseNormalization) {
  const auto cfg = pair_config(2e-4);
  const auto bank = ols_filters(cfg);
  const auto set = noise_covariances(cfg, bank);
  const Mat ji = bank.j_inverse();
  const RawNoise raw = raw_noise(cfg.modes(), cfg.shot_noise_psd(), bank.m, cfg.grid());
  EXPECT_LT((set.M - ji * raw.M * ji.transpose()).cwiseAbs().maxCoeff(), 1e-12 * set.M.norm());
  EXPECT_LT((shot_noise_cov(cfg, bank) - set.M).cwiseAbs().maxCoeff(), 1e-12 * set.M.norm());
  EXPECT_LT((thermal_cov(cfg, bank) - set.T).cwiseAbs().maxCoeff(), 1e-12 * set.T.norm());
  EXPECT_LT((backaction_cov(cfg, bank) - set.B).cwiseAbs().maxCoeff(), 1e-12 * set.B.norm());
  const auto rwa = noise_covariances(cfg, bank, BackactionModel::RotatingWave);
  EXPECT_LT((backaction_cov(cfg, bank, false) - rwa.B).cwiseAbs().maxCoeff(), 1e-12 * rwa.B.norm());
  EXPECT_NEAR(added_occupation(set, 1), block_occupation(set.total(), 1), 1e-15);
  EXPECT_NEAR(set.added[0], added_occupation(set, 0), 1e-12);
}

TEST(NoiseStatistics, CrossErrorMatchesLadderOperatorAverage) {
  Mat total(4, 4);
  total << 2.0, 0.3, 0.5, -0.7, 0.3, 1.5, 0.2, 0.4, 0.5, 0.2, 3.0, 0.1, -0.7, 0.4, 0.1, 2.5;
  Rng rng(11);
  GaussianState noise{Vec::Zero(4), total};
  GaussianSampler sampler(noise);
  Complex acc{0.0, 0.0};
  const int draws = 400000;
  for (int d = 0; d < draws; ++d) {
    const Vec q = sampler(rng);
    const Complex a0(q[0] / std::sqrt(2.0), q[1] / std::sqrt(2.0));
    const Complex a1(q[2] / std::sqrt(2.0), q[3] / std::sqrt(2.0));
    acc += std::conj(a0) * a1;
  }
  acc /= static_cast<double>(draws);
  const Complex c = cross_error(total, 0, 1);
  EXPECT_NEAR(c.real(), acc.real(), 0.01);
  EXPECT_NEAR(c.imag(), acc.imag(), 0.01);
  EXPECT_NEAR(cross_error(total, 0, 0).real(), 0.5 * (2.0 + 1.5), 1e-15);
}

TEST(NoiseStatistics, WishartStandardErrorsMatchReplicateScatter) {
  Mat sigma(3, 3);
  sigma << 2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5;
  const GaussianSampler sampler(GaussianState{Vec::Zero(3), sigma});
  Rng rng(21);
  const std::size_t n_s = 60;
  const int reps = 3000;
  Mat sum = Mat::Zero(3, 3), sum_sq = Mat::Zero(3, 3);
  for (int r = 0; r < reps; ++r) {
    std::vector<Vec> samples;
    for (std::size_t i = 0; i < n_s; ++i) samples.push_back(sampler(rng));
    const Mat s = sample_covariance(samples).sigma;
    sum += s;
    sum_sq += s.cwiseProduct(s);
  }
  const Mat mean = sum / reps;
  const Mat sd = (sum_sq / reps - mean.cwiseProduct(mean)).cwiseSqrt();
  const Mat se = wishart_se(sigma, n_s);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) EXPECT_NEAR(sd(i, j) / se(i, j), 1.0, 0.06) << i << j;
  }
  EXPECT_LT((mean - sigma).cwiseAbs().maxCoeff(), 0.03);
}

TEST(NoiseStatistics, SampleCovarianceFlagsLowDof) {
  std::vector<Vec> few{Vec::Constant(4, 1.0), Vec::Constant(4, 2.0), Vec::Constant(4, 0.5)};
  EXPECT_TRUE(sample_covariance(few).low_dof);
  EXPECT_THROW(sample_covariance({Vec::Zero(2)}), Error);
}

TEST(NoiseStatistics, InferenceFlagsButNeverClips) {
  const auto cfg = fixtures::single(1.0, 0.0, 2e-4);
  const auto set = noise_covariances(cfg, ols_filters(cfg));
  CovarianceEstimate est;
  est.n_s = 1000;
  est.mean = Vec::Zero(2);
  Mat bad(2, 2);
  bad << 0.1, 0.0, 0.0, 0.4;
  est.sigma = set.total() + bad;
  const auto st = infer_state_cov(est, set);
  EXPECT_FALSE(st.physical);
  EXPECT_FALSE(st.flags.empty());
  EXPECT_LT((st.cov - bad).cwiseAbs().maxCoeff(), 1e-12);
}

// Simulated thermal ensemble: sample covariance minus the bias matrices recovers the state.
TEST(NoiseStatistics, ThermalClosureFromSimulation) {
  const auto cfg = pair_config(3e-4);
  const double nu[] = {1.0, 0.5};
  const auto state = thermal_state(nu);
  const auto bank = exp_filters(cfg, optimal_gammas(cfg));
  const auto set = noise_covariances(cfg, bank);
  std::vector<Vec> est;
  for_each_shot(cfg, state, 3000, 5, [&](std::size_t, const Shot& s) { est.push_back(estimate(bank, s.record)); });
  const auto inferred = infer_state_cov(sample_covariance(est), set);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      EXPECT_LT(std::abs(inferred.cov(i, j) - state.cov(i, j)), 4.0 * inferred.se(i, j)) << i << j;
    }
  }
}

TEST(NoiseStatistics, MeanSquareModelMatchesSimulation) {
  const auto cfg = pair_config(2e-4);
  auto state = direct_sum(single_mode_squeezed({0.8, 0.3}, {1.5, -0.5}), thermal_state(std::vector<double>{2.0}));
  const Vec model = mean_square_signal(cfg, state);
  MeanSquareAccumulator acc(cfg.grid().nt(), 50);
  for_each_shot(cfg, state, 3000, 9, [&](std::size_t, const Shot& s) { acc.add(s.record.samples); });
  const auto cmp = compare_mean_square(model, acc, cfg.grid());
  EXPECT_EQ(cmp.z.size(), 20);
  EXPECT_LT(cmp.max_abs_z(), 4.0);
  // Without the white floor the model is the signal variance, which starts from the state.
  const Mat h = design_matrix(cfg.modes(), cfg.grid());
  EXPECT_NEAR(model[0] - cfg.shot_noise_psd() * cfg.grid().fs(),
              h.col(0).dot(state.second_moments() * h.col(0)), 1e-9 * model[0]);
}

TEST(NoiseStatistics, AccumulatorBins) {
  MeanSquareAccumulator acc(5, 2);
  Vec a(5), b(5);
  a << 1, 2, 3, 4, 5;
  b << 1, 0, 1, 0, 1;
  acc.add(a);
  acc.add(b);
  EXPECT_EQ(acc.bin_mean().size(), 3);
  EXPECT_DOUBLE_EQ(acc.bin_mean()[0], 0.5 * (2.5 + 0.5));
  EXPECT_DOUBLE_EQ(acc.bin_mean()[2], 0.5 * (25.0 + 1.0));
  EXPECT_DOUBLE_EQ(acc.mean()[1], 2.0);
  EXPECT_DOUBLE_EQ(acc.bin_se()[0], 1.0);
}
