#pragma once

#include "optoretro/model.hpp"
#include "optoretro/simulator.hpp"
#include "optoretro/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optoretro {

enum class FilterFamily { OLS, EXP, GLS, AVG };

std::string to_string(FilterFamily f);
FilterFamily filter_family_from_string(const std::string& name);

/// 2N temporal weight functions on a grid and their normalization.
///
/// Row 2i / 2i+1 of `m` targets X_i / P_i. `J` maps initial quadratures to
/// mean raw filter outputs: <q> = J <Q>. For the AVG family J is the
/// expectation over the frequency distribution.
struct FilterBank {
  FilterFamily family = FilterFamily::OLS;
  std::vector<double> gammas;  ///< envelope decay rates (EXP only)
  SamplingGrid grid;
  Mat m;
  Mat J;
  double cond = 0.0;
  std::size_t decimation = 1;  ///< GLS design-grid decimation factor

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m.rows()); }
  /// Throws NumericalError when cond(J) > 1e8.
  Mat j_inverse() const;
};

inline constexpr double kMaxConditionNumber = 1e8;

/// Sampled impulse response (2 x nt) of one oscillator as seen in the
/// readout, with Theta(0) = 1/2. `averaged` applies the Gaussian dephasing
/// envelope exp(-sigma^2 t^2 / 2).
Mat response(const ModeModel& mode, const SamplingGrid& grid, bool averaged = false);

/// Mean signal per unit initial quadrature (2N x nt): row 2i+q is
/// sqrt(2) g_eff,i times the readout response of quadrature q, with the
/// signal's own value at t = 0 (no half step). `averaged` gives the
/// expectation over frequency noise.
Mat design_matrix(const std::vector<ModeModel>& modes, const SamplingGrid& grid,
                  bool averaged = false);

/// J = dt * m * H^T, the left-endpoint rule shared with estimate().
Mat normalization_matrix(const Mat& m, const Mat& design, double dt);

double condition_number(const Mat& a);

FilterBank make_bank(FilterFamily family, const ValidatedConfig& config, Mat m,
                     std::vector<double> gammas = {});

FilterBank ols_filters(const ValidatedConfig& config);
FilterBank exp_filters(const ValidatedConfig& config, const std::vector<double>& gammas);
FilterBank avg_filters(const ValidatedConfig& config);

/// sqrt(Gamma^2 + 4 eps (K^2 + K Gamma (2 nu + 1))), K = C Gamma the
/// backaction rate. Equals Gamma sqrt(1 + 4 eps C (C + 2 nu + 1)) for
/// Gamma > 0 and stays finite for undamped oscillators.
double optimal_gamma(double gamma, double cooperativity, double nu, double epsilon);
double optimal_gamma(const ModeModel& mode, double epsilon);
std::vector<double> optimal_gammas(const ValidatedConfig& config);

struct NoiseMatrixOptions {
  std::optional<std::vector<double>> omega_override;
  double memory_budget_bytes = 2.0e9;
};

/// Two-time noise matrix of the sampled signal (nt x nt):
/// 2 sum_kl g_k g_l <D_k(t_n) D_l(t_m)> + P_SN fs delta_nm, from closed-form kernels.
Mat noise_matrix(const ValidatedConfig& config, const NoiseMatrixOptions& options = {});

inline constexpr std::size_t kMaxFullRateSamples = 8192;

/// 1 while the full grid has at most kMaxFullRateSamples points. Otherwise the
/// smallest factor that brings it under that size, capped so the decimated
/// Nyquist frequency still exceeds 5 max(|omega|, gamma_opt) / 2pi.
std::size_t auto_decimation(const ValidatedConfig& config);

struct GlsOptions {
  std::size_t decimation = 0;  ///< 0 = automatic, 1 = full rate
  double memory_budget_bytes = 2.0e9;
};

/// m = Omega^{-1} r via a Cholesky factorization shared by all right-hand sides.
/// With decimation the filters are designed on the coarse grid and cubic-
/// interpolated back to the full grid; J is always computed at full rate.
FilterBank gls_filters(const ValidatedConfig& config, const GlsOptions& options = {});

/// Raw filter outputs dt * m * S (not normalized).
Vec raw_outputs(const FilterBank& bank, const Vec& samples);

/// q = J^{-1} dt * m * S.
Vec estimate(const FilterBank& bank, const HomodyneRecord& record);
Vec estimate(const FilterBank& bank, const Vec& samples);

/// Cubic (Catmull-Rom) resampling of rows sampled on `coarse` onto `fine`.
Mat interpolate_rows(const Mat& rows, const SamplingGrid& coarse, const SamplingGrid& fine);

struct FilterSpectrum {
  std::vector<double> frequency_hz;
  std::vector<double> amplitude;
};

/// |dt sum_n m_row(t_n) exp(-2 pi i f t_n)| on a zero-padded FFT grid up to Nyquist.
FilterSpectrum filter_spectrum(const FilterBank& bank, std::size_t row, std::size_t pad_factor = 4);

nlohmann::json bank_to_json(const FilterBank& bank);
/// time_s, m0, m1, ... one row per sample.
void write_bank_csv(const FilterBank& bank, const std::filesystem::path& path);

}  // namespace optoretro
