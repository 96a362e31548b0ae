#include "optoretro/gaussian_state.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace optoretro {

GaussianState thermal_state(std::span<const double> nu) {
  const auto n = static_cast<Eigen::Index>(nu.size());
  if (n == 0) throw Error("thermal_state: at least one mode is required");
  GaussianState s{Vec::Zero(2 * n), Mat::Zero(2 * n, 2 * n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(nu[i] >= 0.0)) {
      throw ValidationError(fmt::format("nu[{}]", i), "occupation must be >= 0");
    }
    s.cov(2 * i, 2 * i) = nu[i] + 0.5;
    s.cov(2 * i + 1, 2 * i + 1) = nu[i] + 0.5;
  }
  return s;
}

GaussianState single_mode_squeezed(Complex zeta, Complex displacement) {
  const double r = std::abs(zeta);
  const double theta = std::arg(zeta);
  const double ch = std::cosh(2.0 * r);
  const double sh = std::sinh(2.0 * r);
  GaussianState s{Vec(2), Mat(2, 2)};
  s.mean << std::sqrt(2.0) * displacement.real(), std::sqrt(2.0) * displacement.imag();
  s.cov << ch - sh * std::cos(theta), -sh * std::sin(theta),
           -sh * std::sin(theta), ch + sh * std::cos(theta);
  s.cov *= 0.5;
  return s;
}

GaussianState two_mode_squeezed(Complex z) {
  const double r = std::abs(z);
  const double theta = std::arg(z);
  const double diag = 0.5 * std::cosh(2.0 * r);
  const double off = 0.5 * std::sinh(2.0 * r);
  const double c = std::cos(theta);
  const double s = std::sin(theta);

  GaussianState st{Vec::Zero(4), Mat::Zero(4, 4)};
  st.cov.diagonal().setConstant(diag);
  // Off-diagonal block from a1 -> a1 cosh r - a2^dag e^{i theta} sinh r.
  Eigen::Matrix2d k;
  k << -c, -s,
       -s, c;
  st.cov.block<2, 2>(0, 2) = off * k;
  st.cov.block<2, 2>(2, 0) = off * k.transpose();
  return st;
}

GaussianState direct_sum(const GaussianState& a, const GaussianState& b) {
  const auto na = a.mean.size();
  const auto nb = b.mean.size();
  GaussianState s{Vec(na + nb), Mat::Zero(na + nb, na + nb)};
  s.mean << a.mean, b.mean;
  s.cov.topLeftCorner(na, na) = a.cov;
  s.cov.bottomRightCorner(nb, nb) = b.cov;
  return s;
}

double squeeze_parameter_from_db(double db) { return -db * std::log(10.0) / 20.0; }

Vec symplectic_eigenvalues(const Mat& cov) {
  const auto n = cov.rows() / 2;
  Mat omega = Mat::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  Eigen::EigenSolver<Mat> es(omega * cov, false);
  std::vector<double> nus;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    nus.push_back(std::abs(es.eigenvalues()[i].imag()));
  }
  // Eigenvalues come in +-i nu pairs; keep one of each.
  std::sort(nus.begin(), nus.end());
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = 0.5 * (nus[2 * i] + nus[2 * i + 1]);
  return out;
}

bool is_physical(const Mat& cov, double tol) {
  return symplectic_eigenvalues(cov).minCoeff() >= 0.5 - tol;
}

void check_state(const GaussianState& state, bool strict) {
  const auto n = state.mean.size();
  if (n == 0 || n % 2 != 0 || state.cov.rows() != n || state.cov.cols() != n) {
    throw ValidationError("state", "mean must have even length 2N and cov must be 2N x 2N");
  }
  const double scale = std::max(1.0, state.cov.cwiseAbs().maxCoeff());
  if ((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ValidationError("state.cov", "covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(state.cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::max(state.cov.trace(), 1e-300)) {
    throw ValidationError("state.cov", "covariance is not positive semi-definite");
  }
  if (strict && !is_physical(state.cov)) {
    throw ValidationError("state.cov", "violates the uncertainty bound (symplectic eigenvalue < 1/2)");
  }
}

GaussianSampler::GaussianSampler(const GaussianState& state) : mean_(state.mean) {
  const auto n = state.cov.rows();
  if (state.cov.cols() != n || state.mean.size() != n) {
    throw ValidationError("state", "mean/cov dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (state.cov + state.cov.transpose()));
  const double tol = 1e-10 * std::abs(state.cov.trace());
  Vec lambda = es.eigenvalues();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda[i] < -tol) {
      throw NumericalError(
          fmt::format("covariance not PSD within tolerance 1e-10*trace (eigenvalue {})", lambda[i]));
    }
    lambda[i] = std::max(lambda[i], 0.0);
  }
  factor_ = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

Vec GaussianSampler::operator()(Rng& rng) const {
  std::normal_distribution<double> normal;
  Vec z(mean_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return mean_ + factor_ * z;
}

nlohmann::json state_to_json(const GaussianState& state) {
  nlohmann::json doc;
  doc["mean"] = std::vector<double>(state.mean.data(), state.mean.data() + state.mean.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.cov.rows(); ++i) {
    std::vector<double> row(state.cov.cols());
    for (Eigen::Index j = 0; j < state.cov.cols(); ++j) row[j] = state.cov(i, j);
    rows.push_back(row);
  }
  doc["cov"] = rows;
  return doc;
}

GaussianState state_from_json(const nlohmann::json& doc) {
  const auto mean = doc.at("mean").get<std::vector<double>>();
  const auto rows = doc.at("cov").get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Eigen::Index>(mean.size());
  GaussianState s{Vec(n), Mat(n, n)};
  if (static_cast<Eigen::Index>(rows.size()) != n) throw ValidationError("cov", "must be square 2N x 2N");
  for (Eigen::Index i = 0; i < n; ++i) {
    s.mean[i] = mean[i];
    if (static_cast<Eigen::Index>(rows[i].size()) != n) throw ValidationError("cov", "ragged row");
    for (Eigen::Index j = 0; j < n; ++j) s.cov(i, j) = rows[i][j];
  }
  check_state(s, false);
  return s;
}

}  // namespace optoretro
