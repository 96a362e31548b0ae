#include "kernel_oracle.hpp"

#include "optoretro/response_kernels.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace optoretro;
using fixtures::kernel_mode;

namespace {

struct Pair {
  const char* name;
  ModeModel k;
  ModeModel l;
};

std::vector<Pair> pairs() {
  return {
      {"degenerate", kernel_mode(125e3, 2e3, 0.025), kernel_mode(125e3, 2e3, 0.025)},
      {"detuned", kernel_mode(125e3, 2e3, 0.025), kernel_mode(131e3, 3e3, 0.026)},
      {"negative_mass", kernel_mode(125e3, 2e3, 0.025), kernel_mode(-135e3, 2e3, -0.027)},
      {"undamped_degenerate", kernel_mode(125e3, 0.0, 0.0), kernel_mode(125e3, 0.0, 0.0)},
  };
}

double grid_time(int i) { return 5e-5 * (i + 1); }  // 20 points up to 1 ms

}  // namespace

class KernelOracle : public ::testing::TestWithParam<int> {};

TEST_P(KernelOracle, ClosedFormsMatchDirectIntegration) {
  const auto p = pairs()[static_cast<std::size_t>(GetParam())];
  double worst_r = 0.0, worst_c = 0.0, worst_m = 0.0;
  double scale = 0.0;
  for (int i = 0; i < 20; i += 3) {
    for (int j = 0; j < 20; j += 3) {
      const double t = grid_time(i), tp = grid_time(j);
      const double r = fixtures::oracle_R(p.k, p.l, t, tp);
      scale = std::max(scale, std::abs(r));
      worst_r = std::max(worst_r, std::abs(response_correlation(p.k, p.l, t, tp) - r));
      worst_c = std::max(worst_c, std::abs(counter_rotating_correlation(p.k, p.l, t, tp) - fixtures::oracle_counter(p.k, p.l, t, tp)));
      worst_m = std::max(worst_m, std::abs(momentum_correlation(p.k, p.l, t, tp) - fixtures::oracle_momentum(p.k, p.l, t, tp)));
    }
  }
  EXPECT_LT(worst_r, 1e-9 * scale) << p.name;
  EXPECT_LT(worst_c, 1e-9 * scale) << p.name;
  EXPECT_LT(worst_m, 1e-9 * scale) << p.name;
}

INSTANTIATE_TEST_SUITE_P(Pairs, KernelOracle, ::testing::Range(0, 4));

TEST(Kernels, SymmetryUnderExchange) {
  const auto p = pairs()[1];
  for (double t : {1e-5, 3e-4}) {
    for (double tp : {2e-5, 7e-4}) {
      EXPECT_NEAR(response_correlation(p.k, p.l, t, tp), response_correlation(p.l, p.k, tp, t), 1e-12);
      EXPECT_NEAR(momentum_correlation(p.k, p.l, t, tp), momentum_correlation(p.l, p.k, tp, t), 1e-12);
    }
  }
}

TEST(Kernels, EqualTimeSingleModeClosedForm) {
  // R(t, t) = (1 - exp(-Gamma t)) / Gamma for any frequency and phase.
  const auto m = kernel_mode(125e3, 2e3, 0.3);
  for (double t : {1e-7, 1e-5, 1e-3}) {
    EXPECT_NEAR(response_correlation(m, m, t, t), -std::expm1(-m.gamma * t) / m.gamma, 1e-15 + 1e-12 * t);
  }
  EXPECT_EQ(response_correlation(m, m, 0.0, 1e-4), 0.0);
}

TEST(Kernels, Expm1RatioSeriesBranch) {
  const double h = 1e-4;
  for (Complex x : {Complex(1e-3, 0.0), Complex(0.0, 2.0), Complex(5.0, -3.0), Complex(1e4, 7e3)}) {
    // e^{a+ib} - 1 = expm1(a) e^{ib} + 2i sin(b/2) e^{ib/2}, free of cancellation.
    const double a = x.real() * h, b = x.imag() * h;
    const Complex direct = (std::expm1(a) * std::polar(1.0, b) + Complex(0.0, 2.0 * std::sin(0.5 * b)) * std::polar(1.0, 0.5 * b)) / x;
    EXPECT_LT(std::abs(expm1_ratio(x, h) - direct), 1e-12 * std::abs(direct) + 1e-20);
  }
  EXPECT_NEAR(std::abs(expm1_ratio(Complex(0.0, 0.0), h)), h, 1e-20);
}

TEST(Kernels, ComplexResponseHalfStepAtOrigin) {
  const auto m = kernel_mode(125e3, 2e3, 0.1);
  EXPECT_NEAR(std::abs(complex_response(m, 0.0)), 0.5, 1e-15);
  EXPECT_EQ(std::abs(complex_response(m, -1e-6)), 0.0);
  const Complex r = complex_response(m, 1e-6);
  EXPECT_NEAR(r.real(), fixtures::kick_response(m, 0, 1e-6), 1e-14);
  EXPECT_NEAR(-r.imag(), fixtures::kick_response(m, 1, 1e-6), 1e-14);
}

TEST(Kernels, BroadenedSameModeMatchesFrequencyAverage) {
  auto m = kernel_mode(125e3, 2e3, 0.02);
  m.sigma = kTwoPi * 300.0;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  const int draws = 40000;
  for (auto [t, tp] : {std::pair{1e-4, 3e-4}, std::pair{5e-4, 5e-4}, std::pair{8e-4, 2e-4}}) {
    double mean = 0.0, sq = 0.0;
    for (int d = 0; d < draws; ++d) {
      const auto r = m.with_omega(m.omega + m.sigma * n(rng));
      const double v = response_correlation(r, r, t, tp);
      mean += v;
      sq += v * v;
    }
    mean /= draws;
    const double se = std::sqrt(std::max(sq / draws - mean * mean, 0.0) / draws);
    EXPECT_NEAR(broadened_response_correlation(m, m, t, tp, true), mean, 5.0 * se + 1e-12) << t << "," << tp;
  }
}
