#include "optoretro/broadened.hpp"

#include "optoretro/rng.hpp"
#include "optoretro/simulator.hpp"

#include <fmt/format.h>

#include <cmath>

namespace optoretro {

BroadenedMoments broadened_second_moments(const ValidatedConfig& config, const FilterBank& bank,
                                          const std::vector<Vec>& raw_outputs,
                                          const BroadenedOptions& options) {
  bool any_sigma = false;
  for (const auto& m : config.modes()) any_sigma = any_sigma || m.sigma > 0.0;
  if (!any_sigma) {
    throw ValidationError("oscillators.sigma", "broadened inversion needs sigma > 0 for some oscillator");
  }
  if (raw_outputs.size() < 2) throw Error("broadened inversion needs at least 2 shots");
  if (options.n_omega < 2) throw ValidationError("n_omega", "need at least 2 frequency draws");

  BroadenedMoments out;
  const auto& modes = config.modes();
  for (std::size_t k = 0; k < modes.size(); ++k) {
    for (std::size_t l = k + 1; l < modes.size(); ++l) {
      const double ratio = (modes[k].sigma + modes[l].sigma) / std::abs(modes[k].omega - modes[l].omega);
      if (ratio > 0.1) {
        out.warnings.push_back(fmt::format(
            "oscillators {} and {}: (sigma_k + sigma_l) / |omega_k - omega_l| = {:.3g} > 0.1", k, l,
            ratio));
      }
    }
  }

  const auto dim = static_cast<Eigen::Index>(bank.dim());
  const Eigen::Index d2 = dim * dim;
  const double dt = bank.grid.dt();

  // Monte Carlo expectations over the frequency distribution.
  Rng rng = make_stream(options.seed, Stream::Frequency);
  Mat sum_j = Mat::Zero(dim, dim);
  Mat sum_jj = Mat::Zero(d2, d2);
  Mat sum_noise = Mat::Zero(dim, dim);
  Mat sum_noise_sq = Mat::Zero(dim, dim);
  Mat sum_t = Mat::Zero(dim, dim);
  Mat sum_b = Mat::Zero(dim, dim);
  for (std::size_t d = 0; d < options.n_omega; ++d) {
    const auto omegas = sample_frequencies(config, rng);
    std::vector<ModeModel> realized = modes;
    for (std::size_t i = 0; i < realized.size(); ++i) realized[i] = realized[i].with_omega(omegas[i]);
    const Mat j = normalization_matrix(bank.m, design_matrix(realized, bank.grid), dt);
    const RawNoise raw = raw_noise(realized, config.shot_noise_psd(), bank.m, bank.grid);
    sum_j += j;
    // Row (i, j), column (k, l) holds J_ik J_jl.
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index jj = 0; jj < dim; ++jj) {
        for (Eigen::Index k = 0; k < dim; ++k) {
          for (Eigen::Index l = 0; l < dim; ++l) {
            sum_jj(i * dim + jj, k * dim + l) += j(i, k) * j(jj, l);
          }
        }
      }
    }
    sum_t += raw.T;
    sum_b += raw.B;
    const Mat noise = raw.T + raw.B;
    sum_noise += noise;
    sum_noise_sq += noise.cwiseProduct(noise);
    if (d == 0) out.M_primed = raw.M;
  }
  const double nw = static_cast<double>(options.n_omega);
  out.mean_J = sum_j / nw;
  const Mat jj = sum_jj / nw;
  out.T_primed = sum_t / nw;
  out.B_primed = sum_b / nw;
  const Mat noise_mean = sum_noise / nw;
  const Mat noise_var_of_mean =
      ((sum_noise_sq / nw - noise_mean.cwiseProduct(noise_mean)) / (nw - 1.0)).cwiseMax(0.0);

  // Sample raw second moments and their sampling variance.
  const double ns = static_cast<double>(raw_outputs.size());
  Vec q_mean = Vec::Zero(dim);
  Mat s2 = Mat::Zero(dim, dim);
  for (const auto& q : raw_outputs) {
    if (q.size() != dim) throw Error("raw output dimension does not match the bank");
    q_mean += q;
    s2.noalias() += q * q.transpose();
  }
  q_mean /= ns;
  s2 /= ns;
  Mat s2_var = Mat::Zero(dim, dim);
  for (const auto& q : raw_outputs) {
    const Mat dev = q * q.transpose() - s2;
    s2_var += dev.cwiseProduct(dev);
  }
  s2_var /= ns * (ns - 1.0);

  const Mat target = s2 - out.T_primed - out.B_primed - out.M_primed;

  // Unknowns: upper triangle of <Q Q^T>.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> unknowns;
  for (Eigen::Index k = 0; k < dim; ++k) {
    for (Eigen::Index l = k; l < dim; ++l) unknowns.emplace_back(k, l);
  }
  const auto nu = static_cast<Eigen::Index>(unknowns.size());
  Mat a(d2, nu);
  Vec y(d2);
  Vec w(d2);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const Eigen::Index r = i * dim + j;
      for (Eigen::Index u = 0; u < nu; ++u) {
        const auto [k, l] = unknowns[static_cast<std::size_t>(u)];
        a(r, u) = jj(r, k * dim + l) + (k != l ? jj(r, l * dim + k) : 0.0);
      }
      y[r] = target(i, j);
      const double var = s2_var(i, j) + noise_var_of_mean(i, j);
      w[r] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
  }
  const Mat aw = w.asDiagonal() * a;
  const Vec yw = w.asDiagonal() * y;
  Eigen::JacobiSVD<Mat> svd(aw, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  out.smallest_singular_value = sv[sv.size() - 1];
  if (!(out.smallest_singular_value > 1e-12 * sv[0])) {
    throw NumericalError(fmt::format(
        "second-moment system is rank deficient: smallest singular value {:.3e} (largest {:.3e})",
        out.smallest_singular_value, sv[0]));
  }
  const Vec x = svd.solve(yw);
  // Parameter covariance of the weighted solve.
  const Mat vinv = svd.matrixV() * sv.cwiseInverse().asDiagonal();
  const Mat xcov = vinv * vinv.transpose();

  out.second_moments = Mat::Zero(dim, dim);
  out.second_moments_se = Mat::Zero(dim, dim);
  for (Eigen::Index u = 0; u < nu; ++u) {
    const auto [k, l] = unknowns[static_cast<std::size_t>(u)];
    out.second_moments(k, l) = out.second_moments(l, k) = x[u];
    out.second_moments_se(k, l) = out.second_moments_se(l, k) = std::sqrt(xcov(u, u));
  }
  out.mean = out.mean_J.inverse() * q_mean;
  out.cov = out.second_moments - out.mean * out.mean.transpose();
  return out;
}

}  // namespace optoretro
