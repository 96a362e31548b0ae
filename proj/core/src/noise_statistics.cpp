#include "optoretro/noise_statistics.hpp"

#include "optoretro/response_kernels.hpp"
#include "optoretro/rng.hpp"
#include "optoretro/simulator.hpp"

#include <fmt/format.h>

#include <cmath>

namespace optoretro {

RawNoise raw_noise(const std::vector<ModeModel>& modes, double shot_noise_psd, const Mat& m,
                   const SamplingGrid& grid) {
  const auto k_dim = m.rows();
  const auto nt = m.cols();
  const auto n_modes = modes.size();
  const double dt = grid.dt();
  if (static_cast<std::size_t>(nt) != grid.nt()) throw Error("filter length does not match grid");

  RawNoise out;
  out.M = shot_noise_psd * dt * (m * m.transpose());

  std::vector<Complex> decay(n_modes), lift(n_modes);
  for (std::size_t k = 0; k < n_modes; ++k) {
    decay[k] = std::exp(-decay_constant(modes[k]) * dt);
    lift[k] = std::sqrt(2.0) * modes[k].g_eff * std::polar(1.0, modes[k].phi);
  }

  // C_kl = sum_j V_kj V_lj^H and D_kl = sum_j V_kj V_lj^T.
  std::vector<Eigen::MatrixXcd> c(n_modes * n_modes, Eigen::MatrixXcd::Zero(k_dim, k_dim));
  std::vector<Eigen::MatrixXcd> d(n_modes * n_modes, Eigen::MatrixXcd::Zero(k_dim, k_dim));
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(k_dim, static_cast<Eigen::Index>(n_modes));
  Eigen::MatrixXcd v(k_dim, static_cast<Eigen::Index>(n_modes));
  for (Eigen::Index j = nt - 2; j >= 0; --j) {
    for (std::size_t k = 0; k < n_modes; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      u.col(kk) = decay[k] * (u.col(kk) + (dt * m.col(j + 1)).cast<Complex>());
      v.col(kk) = lift[k] * u.col(kk);
    }
    for (std::size_t k = 0; k < n_modes; ++k) {
      for (std::size_t l = 0; l < n_modes; ++l) {
        const auto vk = v.col(static_cast<Eigen::Index>(k));
        const auto vl = v.col(static_cast<Eigen::Index>(l));
        c[k * n_modes + l].noalias() += vk * vl.adjoint();
        d[k * n_modes + l].noalias() += vk * vl.transpose();
      }
    }
  }

  out.T = Mat::Zero(k_dim, k_dim);
  out.B = Mat::Zero(k_dim, k_dim);
  out.B_rwa = Mat::Zero(k_dim, k_dim);
  for (std::size_t k = 0; k < n_modes; ++k) {
    const Complex ak = decay_constant(modes[k]);
    out.T += modes[k].thermal_rate * (c[k * n_modes + k] * expm1_ratio(ak + std::conj(ak), dt)).real();
    for (std::size_t l = 0; l < n_modes; ++l) {
      const Complex al = decay_constant(modes[l]);
      const double w = 0.25 * modes[k].backaction_coupling * modes[l].backaction_coupling;
      if (w == 0.0) continue;
      const Mat co = (c[k * n_modes + l] * expm1_ratio(ak + std::conj(al), dt)).real();
      const Mat counter = (d[k * n_modes + l] * expm1_ratio(ak + al, dt)).real();
      out.B += w * (co - counter);
      out.B_rwa += w * co;
    }
  }
  const auto sym = [](Mat& a) { a = 0.5 * (a + a.transpose()).eval(); };
  sym(out.T);
  sym(out.B);
  sym(out.B_rwa);
  sym(out.M);
  return out;
}

namespace {

Vec block_occupations(const Mat& total) {
  Vec out(total.rows() / 2);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = block_occupation(total, static_cast<std::size_t>(i));
  return out;
}

}  // namespace

NoiseCovarianceSet noise_covariances(const ValidatedConfig& config, const FilterBank& bank,
                                     BackactionModel backaction) {
  if (!(bank.grid == config.grid())) throw Error("bank grid does not match config grid");
  const RawNoise raw = raw_noise(config.modes(), config.shot_noise_psd(), bank.m, bank.grid);
  const Mat ji = bank.j_inverse();
  NoiseCovarianceSet set;
  set.backaction = backaction;
  set.M = ji * raw.M * ji.transpose();
  set.T = ji * raw.T * ji.transpose();
  set.B = ji * (backaction == BackactionModel::Exact ? raw.B : raw.B_rwa) * ji.transpose();
  set.added = block_occupations(set.total());
  return set;
}

Mat shot_noise_cov(const ValidatedConfig& config, const FilterBank& bank) {
  const Mat ji = bank.j_inverse();
  return config.shot_noise_psd() * bank.grid.dt() * ji * bank.m * bank.m.transpose() *
         ji.transpose();
}

Mat thermal_cov(const ValidatedConfig& config, const FilterBank& bank) {
  return noise_covariances(config, bank).T;
}

Mat backaction_cov(const ValidatedConfig& config, const FilterBank& bank, bool exact) {
  return noise_covariances(config, bank,
                           exact ? BackactionModel::Exact : BackactionModel::RotatingWave)
      .B;
}

double block_occupation(const Mat& cov, std::size_t i) {
  const auto k = static_cast<Eigen::Index>(2 * i);
  return 0.5 * (cov(k, k) + cov(k + 1, k + 1));
}

double added_occupation(const NoiseCovarianceSet& set, std::size_t i) {
  return block_occupation(set.total(), i);
}

Complex cross_error(const Mat& total, std::size_t i, std::size_t j) {
  const Eigen::Matrix2d b = total.block<2, 2>(static_cast<Eigen::Index>(2 * i),
                                              static_cast<Eigen::Index>(2 * j));
  const Eigen::RowVector2cd left(Complex(1.0, 0.0), Complex(0.0, -1.0));
  const Eigen::Vector2cd right(Complex(1.0, 0.0), Complex(0.0, 1.0));
  return 0.5 * (left * b.cast<Complex>() * right)(0, 0);
}

Mat wishart_se(const Mat& sigma, std::size_t n_s) {
  if (n_s < 2) throw Error("standard errors need at least 2 samples");
  const auto n = sigma.rows();
  Mat se(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      se(i, j) = std::sqrt((sigma(i, j) * sigma(i, j) + sigma(i, i) * sigma(j, j)) /
                           static_cast<double>(n_s - 1));
    }
  }
  return se;
}

CovarianceEstimate sample_covariance(const std::vector<Vec>& samples) {
  if (samples.size() < 2) throw Error("sample covariance needs at least 2 samples");
  const auto dim = samples.front().size();
  CovarianceEstimate est;
  est.n_s = samples.size();
  est.mean = Vec::Zero(dim);
  for (const auto& s : samples) {
    if (s.size() != dim) throw Error("samples differ in dimension");
    est.mean += s;
  }
  est.mean /= static_cast<double>(est.n_s);
  est.sigma = Mat::Zero(dim, dim);
  for (const auto& s : samples) {
    const Vec d = s - est.mean;
    est.sigma.noalias() += d * d.transpose();
  }
  est.sigma /= static_cast<double>(est.n_s - 1);
  est.se = wishart_se(est.sigma, est.n_s);
  est.low_dof = est.dof() < 10 * static_cast<std::size_t>(dim);
  return est;
}

InferredState infer_state_cov(const CovarianceEstimate& estimate, const NoiseCovarianceSet& set) {
  if (estimate.n_s < 2) throw Error("inference needs at least 2 samples");
  if (estimate.sigma.rows() != set.M.rows()) {
    throw Error(fmt::format("estimate dimension {} does not match noise set dimension {}",
                            estimate.sigma.rows(), set.M.rows()));
  }
  InferredState st;
  st.cov = estimate.sigma - set.total();
  st.se = wishart_se(estimate.sigma, estimate.n_s);
  st.symplectic = symplectic_eigenvalues(st.cov);
  const double smin = st.symplectic.minCoeff();
  if (smin < 0.5) {
    st.physical = false;
    st.flags.push_back(fmt::format("smallest symplectic eigenvalue {:.4g} < 1/2", smin));
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(st.cov, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < 0.0) {
    st.physical = false;
    st.flags.push_back(fmt::format("inferred covariance has negative eigenvalue {:.4g}",
                                   es.eigenvalues().minCoeff()));
  }
  if (estimate.low_dof) st.flags.push_back("low degrees of freedom: standard errors unreliable");
  return st;
}

namespace {

Vec mean_square_for(const std::vector<ModeModel>& modes, const Mat& second_moments,
                    const SamplingGrid& grid) {
  const Mat h = design_matrix(modes, grid);
  const auto nt = static_cast<Eigen::Index>(grid.nt());
  Vec out(nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    const double t = grid.time(static_cast<std::size_t>(n));
    double v = h.col(n).dot(second_moments * h.col(n));
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const auto& a = modes[k];
      v += 2.0 * a.g_eff * a.g_eff * a.thermal_rate * response_correlation(a, a, t, t);
      for (std::size_t l = 0; l < modes.size(); ++l) {
        const auto& b = modes[l];
        const double w = a.g_eff * b.g_eff * a.backaction_coupling * b.backaction_coupling;
        if (w != 0.0) v += w * momentum_correlation(a, b, t, t);
      }
    }
    out[n] = v;
  }
  return out;
}

}  // namespace

Vec mean_square_signal(const ValidatedConfig& config, const GaussianState& state,
                       std::size_t n_omega) {
  if (state.mean.size() != static_cast<Eigen::Index>(config.dim())) {
    throw Error("state dimension does not match the configuration");
  }
  const Mat s2 = state.second_moments();
  bool broadened = false;
  for (const auto& m : config.modes()) broadened = broadened || m.sigma > 0.0;
  Vec out;
  if (!broadened || n_omega == 0) {
    out = mean_square_for(config.modes(), s2, config.grid());
  } else {
    Rng rng = make_stream(0x6D735F6D6F64656CULL, Stream::Frequency);
    out = Vec::Zero(static_cast<Eigen::Index>(config.grid().nt()));
    for (std::size_t d = 0; d < n_omega; ++d) {
      const auto omegas = sample_frequencies(config, rng);
      std::vector<ModeModel> modes = config.modes();
      for (std::size_t i = 0; i < modes.size(); ++i) modes[i] = modes[i].with_omega(omegas[i]);
      out += mean_square_for(modes, s2, config.grid());
    }
    out /= static_cast<double>(n_omega);
  }
  out.array() += config.shot_noise_psd() * config.grid().fs();
  return out;
}

MeanSquareAccumulator::MeanSquareAccumulator(std::size_t nt, std::size_t bin)
    : nt_(nt), bin_(std::max<std::size_t>(1, bin)) {
  const auto nb = static_cast<Eigen::Index>((nt_ + bin_ - 1) / bin_);
  sum_ = Vec::Zero(static_cast<Eigen::Index>(nt_));
  bin_sum_ = Vec::Zero(nb);
  bin_sum_sq_ = Vec::Zero(nb);
}

void MeanSquareAccumulator::add(const Vec& samples) {
  if (static_cast<std::size_t>(samples.size()) != nt_) throw Error("record length mismatch");
  const Vec sq = samples.array().square();
  sum_ += sq;
  for (Eigen::Index b = 0; b < bin_sum_.size(); ++b) {
    const auto start = b * static_cast<Eigen::Index>(bin_);
    const auto len = std::min<Eigen::Index>(static_cast<Eigen::Index>(bin_), sq.size() - start);
    const double mean = sq.segment(start, len).mean();
    bin_sum_[b] += mean;
    bin_sum_sq_[b] += mean * mean;
  }
  ++count_;
}

Vec MeanSquareAccumulator::mean() const { return sum_ / static_cast<double>(count_); }

Vec MeanSquareAccumulator::bin_mean() const { return bin_sum_ / static_cast<double>(count_); }

Vec MeanSquareAccumulator::bin_se() const {
  if (count_ < 2) throw Error("bin standard errors need at least 2 records");
  const double n = static_cast<double>(count_);
  const Vec mean = bin_mean();
  const Vec var = ((bin_sum_sq_.array() - n * mean.array().square()) / (n - 1.0)).max(0.0);
  return (var.array() / n).sqrt();
}

MeanSquareComparison compare_mean_square(const Vec& model, const MeanSquareAccumulator& acc,
                                         const SamplingGrid& grid) {
  MeanSquareComparison cmp;
  cmp.empirical = acc.bin_mean();
  cmp.se = acc.bin_se();
  const auto nb = cmp.empirical.size();
  const auto bin = static_cast<Eigen::Index>(acc.bin());
  cmp.model = Vec(nb);
  for (Eigen::Index b = 0; b < nb; ++b) {
    const auto start = b * bin;
    const auto len = std::min<Eigen::Index>(bin, model.size() - start);
    cmp.model[b] = model.segment(start, len).mean();
    cmp.time_s.push_back(grid.time(static_cast<std::size_t>(start)) +
                         0.5 * static_cast<double>(len - 1) * grid.dt());
  }
  cmp.z = (cmp.empirical - cmp.model).array() / cmp.se.array();
  return cmp;
}

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json noise_set_to_json(const NoiseCovarianceSet& set) {
  nlohmann::json doc;
  doc["variant"] = set.primed ? "primed" : "standard";
  doc["backaction"] = set.backaction == BackactionModel::Exact ? "exact" : "rwa";
  doc["M"] = matrix_to_json(set.M);
  doc["T"] = matrix_to_json(set.T);
  doc["B"] = matrix_to_json(set.B);
  doc["added_occupation"] = std::vector<double>(set.added.data(), set.added.data() + set.added.size());
  return doc;
}

nlohmann::json covariance_estimate_to_json(const CovarianceEstimate& est) {
  nlohmann::json doc;
  doc["n_s"] = est.n_s;
  doc["dof"] = est.dof();
  doc["low_dof"] = est.low_dof;
  doc["mean"] = std::vector<double>(est.mean.data(), est.mean.data() + est.mean.size());
  doc["sigma"] = matrix_to_json(est.sigma);
  doc["se"] = matrix_to_json(est.se);
  return doc;
}

nlohmann::json inferred_state_to_json(const InferredState& st) {
  nlohmann::json doc;
  doc["cov"] = matrix_to_json(st.cov);
  doc["se"] = matrix_to_json(st.se);
  doc["symplectic_eigenvalues"] =
      std::vector<double>(st.symplectic.data(), st.symplectic.data() + st.symplectic.size());
  doc["physical"] = st.physical;
  doc["flags"] = st.flags;
  return doc;
}

}  // namespace optoretro
