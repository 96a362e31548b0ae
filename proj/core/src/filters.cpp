#include "optoretro/filters.hpp"

#include "optoretro/response_kernels.hpp"

#include <fmt/format.h>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace optoretro {

std::string to_string(FilterFamily f) {
  switch (f) {
    case FilterFamily::OLS: return "ols";
    case FilterFamily::EXP: return "exp";
    case FilterFamily::GLS: return "gls";
    case FilterFamily::AVG: return "avg";
  }
  return "unknown";
}

FilterFamily filter_family_from_string(const std::string& name) {
  if (name == "ols") return FilterFamily::OLS;
  if (name == "exp") return FilterFamily::EXP;
  if (name == "gls") return FilterFamily::GLS;
  if (name == "avg") return FilterFamily::AVG;
  throw ValidationError("family", fmt::format("unknown filter family '{}' (ols|exp|gls|avg)", name));
}

Mat FilterBank::j_inverse() const {
  if (!(cond <= kMaxConditionNumber)) {
    throw NumericalError(
        fmt::format("normalization matrix is ill-conditioned: cond(J) = {:.3e} > 1e8", cond));
  }
  return J.inverse();
}

namespace {

Mat sampled_response(const ModeModel& mode, const SamplingGrid& grid, bool averaged, double at_zero) {
  const auto nt = static_cast<Eigen::Index>(grid.nt());
  Mat r(2, nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    const double t = grid.time(static_cast<std::size_t>(n));
    double env = std::exp(-0.5 * mode.gamma * t);
    if (averaged) env *= std::exp(-0.5 * mode.sigma * mode.sigma * t * t);
    if (n == 0) env *= at_zero;
    r(0, n) = env * std::cos(mode.omega * t - mode.phi);
    r(1, n) = env * std::sin(mode.omega * t - mode.phi);
  }
  return r;
}

}  // namespace

Mat response(const ModeModel& mode, const SamplingGrid& grid, bool averaged) {
  return sampled_response(mode, grid, averaged, 0.5);
}

Mat design_matrix(const std::vector<ModeModel>& modes, const SamplingGrid& grid, bool averaged) {
  Mat h(2 * modes.size(), grid.nt());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    h.middleRows(2 * i, 2) =
        std::sqrt(2.0) * modes[i].g_eff * sampled_response(modes[i], grid, averaged, 1.0);
  }
  return h;
}

Mat normalization_matrix(const Mat& m, const Mat& design, double dt) {
  return dt * m * design.transpose();
}

double condition_number(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

FilterBank make_bank(FilterFamily family, const ValidatedConfig& config, Mat m,
                     std::vector<double> gammas) {
  if (static_cast<std::size_t>(m.rows()) != config.dim() ||
      static_cast<std::size_t>(m.cols()) != config.grid().nt()) {
    throw Error(fmt::format("filter matrix is {}x{}, expected {}x{}", m.rows(), m.cols(),
                            config.dim(), config.grid().nt()));
  }
  FilterBank bank;
  bank.family = family;
  bank.gammas = std::move(gammas);
  bank.grid = config.grid();
  bank.m = std::move(m);
  const bool averaged = family == FilterFamily::AVG;
  bank.J = normalization_matrix(bank.m, design_matrix(config.modes(), bank.grid, averaged),
                                bank.grid.dt());
  bank.cond = condition_number(bank.J);
  return bank;
}

FilterBank ols_filters(const ValidatedConfig& config) {
  Mat m(config.dim(), config.grid().nt());
  for (std::size_t i = 0; i < config.size(); ++i) {
    m.middleRows(2 * i, 2) = response(config.modes()[i], config.grid());
  }
  return make_bank(FilterFamily::OLS, config, std::move(m));
}

FilterBank exp_filters(const ValidatedConfig& config, const std::vector<double>& gammas) {
  if (gammas.size() != config.size()) {
    throw ValidationError("gamma", fmt::format("expected {} decay rates, got {}", config.size(),
                                               gammas.size()));
  }
  Mat m(config.dim(), config.grid().nt());
  for (std::size_t i = 0; i < config.size(); ++i) {
    if (!(gammas[i] > 0.0)) {
      throw ValidationError(fmt::format("gamma[{}]", i), "filter decay rate must be > 0");
    }
    ModeModel shaped = config.modes()[i];
    shaped.gamma = gammas[i];
    m.middleRows(2 * i, 2) = response(shaped, config.grid());
  }
  return make_bank(FilterFamily::EXP, config, std::move(m), gammas);
}

FilterBank avg_filters(const ValidatedConfig& config) {
  Mat m(config.dim(), config.grid().nt());
  for (std::size_t i = 0; i < config.size(); ++i) {
    m.middleRows(2 * i, 2) = response(config.modes()[i], config.grid(), true);
  }
  return make_bank(FilterFamily::AVG, config, std::move(m));
}

double optimal_gamma(double gamma, double cooperativity, double nu, double epsilon) {
  const double k = cooperativity * gamma;
  return std::sqrt(gamma * gamma + 4.0 * epsilon * (k * k + k * gamma * (2.0 * nu + 1.0)));
}

double optimal_gamma(const ModeModel& mode, double epsilon) {
  // Backaction rate K = beta^2 / 2 = C Gamma, defined even when Gamma = 0.
  const double k = 0.5 * mode.backaction_coupling * mode.backaction_coupling;
  return std::sqrt(mode.gamma * mode.gamma +
                   4.0 * epsilon * (k * k + k * mode.gamma * (2.0 * mode.nu + 1.0)));
}

std::vector<double> optimal_gammas(const ValidatedConfig& config) {
  std::vector<double> out;
  for (const auto& m : config.modes()) out.push_back(optimal_gamma(m, config.cavity().epsilon));
  return out;
}

namespace {

// Adds coef * Re[X[n - m] - X[n] Y[m]] (or its degenerate series form) to
// the lower triangle of omega, for the kernel int exp(-x (t_n - tau) - y (t_m - tau)).
void add_kernel(Mat& omega, Complex x, Complex y, Complex coef, double dt, double tf) {
  const auto nt = omega.rows();
  std::vector<Complex> ex(nt), ey(nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    ex[n] = std::exp(-x * (static_cast<double>(n) * dt));
    ey[n] = std::exp(-y * (static_cast<double>(n) * dt));
  }
  const Complex s = x + y;
  if (std::abs(s) * tf > 1e-2) {
    const Complex c = coef / s;
    for (Eigen::Index m = 0; m < nt; ++m) {
      const Complex cy = c * ey[m];
      double* col = omega.col(m).data();
      for (Eigen::Index n = m; n < nt; ++n) {
        col[n] += std::real(c * ex[n - m] - cy * ex[n]);
      }
    }
    return;
  }
  for (Eigen::Index m = 0; m < nt; ++m) {
    const double tm = static_cast<double>(m) * dt;
    const Complex cz = coef * std::exp(-s * tm) * expm1_ratio(s, tm);
    double* col = omega.col(m).data();
    for (Eigen::Index n = m; n < nt; ++n) col[n] += std::real(cz * ex[n - m]);
  }
}

}  // namespace

Mat noise_matrix(const ValidatedConfig& config, const NoiseMatrixOptions& options) {
  const auto& grid = config.grid();
  const double bytes = 8.0 * static_cast<double>(grid.nt()) * static_cast<double>(grid.nt());
  if (bytes > options.memory_budget_bytes) {
    const double factor = std::ceil(std::sqrt(bytes / options.memory_budget_bytes));
    throw NumericalError(fmt::format(
        "noise matrix needs {:.2f} GB (budget {:.2f} GB); decimate the design grid by >= {}",
        bytes / 1e9, options.memory_budget_bytes / 1e9, factor));
  }
  std::vector<ModeModel> modes = config.modes();
  if (options.omega_override) {
    if (options.omega_override->size() != modes.size()) {
      throw Error("omega_override must have one entry per oscillator");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
      modes[i] = modes[i].with_omega((*options.omega_override)[i]);
    }
  }
  if (!std::isfinite(config.shot_noise_psd())) {
    throw ValidationError("cavity.nbar", "no probe light: infinite shot noise");
  }
  const auto nt = static_cast<Eigen::Index>(grid.nt());
  Mat omega = Mat::Zero(nt, nt);
  const double dt = grid.dt();
  const double tf = dt * static_cast<double>(nt);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    for (std::size_t l = 0; l < modes.size(); ++l) {
      const auto& a = modes[k];
      const auto& b = modes[l];
      const double gg = a.g_eff * b.g_eff;
      double w = 0.5 * gg * a.backaction_coupling * b.backaction_coupling;
      if (k == l) w += 2.0 * gg * a.thermal_rate;
      const double w_counter = -0.5 * gg * a.backaction_coupling * b.backaction_coupling;
      if (w != 0.0) {
        add_kernel(omega, std::conj(decay_constant(a)), decay_constant(b),
                   w * std::polar(1.0, b.phi - a.phi), dt, tf);
      }
      if (w_counter != 0.0) {
        add_kernel(omega, decay_constant(a), decay_constant(b),
                   w_counter * std::polar(1.0, a.phi + b.phi), dt, tf);
      }
    }
  }
  omega.diagonal().array() += config.shot_noise_psd() * grid.fs();
  omega.triangularView<Eigen::StrictlyUpper>() = omega.transpose();
  return omega;
}

std::size_t auto_decimation(const ValidatedConfig& config) {
  const std::size_t nt = config.grid().nt();
  if (nt <= kMaxFullRateSamples) return 1;
  double fmax = 0.0;
  for (const auto& m : config.modes()) {
    const double fast = std::max(std::abs(m.omega), optimal_gamma(m, config.cavity().epsilon));
    fmax = std::max(fmax, fast / kTwoPi);
  }
  const double fs = config.grid().fs();
  // Decimated Nyquist fs / (2k) must exceed 5 fmax.
  auto limit = static_cast<std::size_t>(std::floor(fs / (10.0 * fmax)));
  while (limit > 1 && fs / static_cast<double>(limit) <= 10.0 * fmax) --limit;
  const std::size_t wanted = (nt + kMaxFullRateSamples - 1) / kMaxFullRateSamples;
  return std::max<std::size_t>(1, std::min(wanted, limit));
}

Mat interpolate_rows(const Mat& rows, const SamplingGrid& coarse, const SamplingGrid& fine) {
  const auto nc = rows.cols();
  const auto nf = static_cast<Eigen::Index>(fine.nt());
  Mat out(rows.rows(), nf);
  const auto at = [&](Eigen::Index j) { return rows.col(std::clamp<Eigen::Index>(j, 0, nc - 1)); };
  for (Eigen::Index n = 0; n < nf; ++n) {
    const double u = fine.time(static_cast<std::size_t>(n)) * coarse.fs();
    auto j = static_cast<Eigen::Index>(std::floor(u));
    double s = u - static_cast<double>(j);
    if (j >= nc - 1) {
      j = nc - 1;
      s = 0.0;
    }
    const double s2 = s * s;
    const double s3 = s2 * s;
    out.col(n) = 0.5 * ((2.0 * at(j)) + (-at(j - 1) + at(j + 1)) * s +
                        (2.0 * at(j - 1) - 5.0 * at(j) + 4.0 * at(j + 1) - at(j + 2)) * s2 +
                        (-at(j - 1) + 3.0 * at(j) - 3.0 * at(j + 1) + at(j + 2)) * s3);
  }
  return out;
}

FilterBank gls_filters(const ValidatedConfig& config, const GlsOptions& options) {
  const std::size_t k = options.decimation == 0 ? auto_decimation(config) : options.decimation;
  const SamplingGrid coarse = config.grid().decimated(k);
  const ValidatedConfig design_cfg = k == 1 ? config : config.with_grid(coarse);

  NoiseMatrixOptions nm;
  nm.memory_budget_bytes = options.memory_budget_bytes;
  const Mat omega = noise_matrix(design_cfg, nm);
  Eigen::LLT<Mat> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization of the noise matrix failed");
  }
  Mat r(config.dim(), coarse.nt());
  for (std::size_t i = 0; i < config.size(); ++i) {
    r.middleRows(2 * i, 2) = response(config.modes()[i], coarse);
  }
  Mat m = llt.solve(r.transpose()).transpose();
  if (k > 1) m = interpolate_rows(m, coarse, config.grid());
  // Overall scale is arbitrary (J absorbs it); keep entries O(1).
  m /= m.cwiseAbs().maxCoeff();
  FilterBank bank = make_bank(FilterFamily::GLS, config, std::move(m));
  bank.decimation = k;
  return bank;
}

Vec raw_outputs(const FilterBank& bank, const Vec& samples) {
  if (static_cast<std::size_t>(samples.size()) != bank.grid.nt()) {
    throw Error(fmt::format("record has {} samples but the bank grid has {}", samples.size(),
                            bank.grid.nt()));
  }
  return bank.grid.dt() * (bank.m * samples);
}

Vec estimate(const FilterBank& bank, const Vec& samples) {
  return bank.j_inverse() * raw_outputs(bank, samples);
}

Vec estimate(const FilterBank& bank, const HomodyneRecord& record) {
  return estimate(bank, record.samples);
}

FilterSpectrum filter_spectrum(const FilterBank& bank, std::size_t row, std::size_t pad_factor) {
  if (row >= bank.dim()) throw Error("filter row out of range");
  std::size_t nfft = 1;
  while (nfft < pad_factor * bank.grid.nt()) nfft <<= 1;
  std::vector<double> x(nfft, 0.0);
  for (Eigen::Index n = 0; n < bank.m.cols(); ++n) x[n] = bank.m(row, n);
  Eigen::FFT<double> fft;
  std::vector<Complex> bins;
  fft.fwd(bins, x);
  FilterSpectrum out;
  for (std::size_t f = 0; f <= nfft / 2; ++f) {
    out.frequency_hz.push_back(static_cast<double>(f) * bank.grid.fs() / static_cast<double>(nfft));
    out.amplitude.push_back(std::abs(bins[f]) * bank.grid.dt());
  }
  return out;
}

nlohmann::json bank_to_json(const FilterBank& bank) {
  nlohmann::json doc;
  doc["family"] = to_string(bank.family);
  doc["gammas_hz"] = nlohmann::json::array();
  for (double g : bank.gammas) doc["gammas_hz"].push_back(g / kTwoPi);
  doc["grid"] = {{"fs_hz", bank.grid.fs()}, {"tf_s", bank.grid.tf()}, {"nt", bank.grid.nt()}};
  doc["decimation"] = bank.decimation;
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < bank.J.rows(); ++r) {
    std::vector<double> row(bank.J.cols());
    for (Eigen::Index c = 0; c < bank.J.cols(); ++c) row[c] = bank.J(r, c);
    j.push_back(row);
  }
  doc["J"] = j;
  doc["cond_J"] = bank.cond;
  return doc;
}

void write_bank_csv(const FilterBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << "time_s";
  for (Eigen::Index r = 0; r < bank.m.rows(); ++r) out << ",m" << r;
  out << '\n';
  for (Eigen::Index n = 0; n < bank.m.cols(); ++n) {
    out << fmt::format("{:.17g}", bank.grid.time(static_cast<std::size_t>(n)));
    for (Eigen::Index r = 0; r < bank.m.rows(); ++r) out << fmt::format(",{:.17g}", bank.m(r, n));
    out << '\n';
  }
}

}  // namespace optoretro
