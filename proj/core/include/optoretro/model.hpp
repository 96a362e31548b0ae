#pragma once

#include "optoretro/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace optoretro {

// All rates and frequencies below are angular (rad/s). Conversion from the Hz
// values of the configuration file happens once, in config_io.

/// One mechanical (or spin) oscillator coupled to the cavity.
///
/// A negative `omega` describes an effective negative-mass oscillator: every
/// downstream formula uses `omega` verbatim, which reverses the phase-space
/// rotation without any extra flag.
struct OscillatorParams {
  double omega = 0.0;            ///< angular frequency, signed
  double gamma = 0.0;            ///< energy damping rate
  double g = 0.0;                ///< optomechanical coupling
  double nu = 0.0;               ///< thermal bath occupation
  double sigma = 0.0;            ///< shot-to-shot frequency fluctuation std
  double extra_diffusion = 0.0;  ///< additional quadrature diffusion rate

  bool operator==(const OscillatorParams&) const = default;
};

/// Resonantly driven single-mode cavity. Detuning is identically zero.
struct CavityParams {
  static constexpr double detuning = 0.0;

  double kappa = 0.0;    ///< half-linewidth
  double nbar = 0.0;     ///< mean intracavity photon number
  double epsilon = 1.0;  ///< total detection efficiency

  bool operator==(const CavityParams&) const = default;
};

/// Uniform sampling t_n = n / fs for n in [0, nt).
class SamplingGrid {
public:
  SamplingGrid() = default;
  SamplingGrid(double fs, double tf);

  double fs() const noexcept { return fs_; }
  double tf() const noexcept { return tf_; }
  std::size_t nt() const noexcept { return nt_; }
  double dt() const noexcept { return 1.0 / fs_; }
  double time(std::size_t n) const noexcept { return static_cast<double>(n) / fs_; }

  /// Grid covering the same duration at fs / factor.
  SamplingGrid decimated(std::size_t factor) const;

  bool operator==(const SamplingGrid&) const = default;

private:
  double fs_ = 0.0;
  double tf_ = 0.0;
  std::size_t nt_ = 0;
};

struct SystemConfig {
  CavityParams cavity;
  std::vector<OscillatorParams> oscillators;  ///< order fixes quadrature indexing (X1,P1,X2,P2,...)
  SamplingGrid grid;

  bool operator==(const SystemConfig&) const = default;
};

struct SidebandCorrection {
  double g_eff = 0.0;
  double phi = 0.0;
};

/// Per-oscillator quantities every estimator and the simulator share.
///
/// The diffusion model is written in rates so that undamped oscillators
/// (gamma = 0) stay well defined: each quadrature receives `thermal_rate`
/// of independent diffusion, and the P quadrature is kicked by
/// -backaction_coupling * xi_AM, where xi_AM is the shared vacuum amplitude
/// noise of symmetrized density 1/2.
struct ModeModel {
  double omega = 0.0;
  double gamma = 0.0;
  double g_eff = 0.0;
  double phi = 0.0;
  double nu = 0.0;
  double sigma = 0.0;
  double thermal_rate = 0.0;         ///< gamma (nu + 1/2) + extra_diffusion
  double backaction_coupling = 0.0;  ///< sqrt(2 C gamma) = sqrt(8 nbar g_eff^2 / kappa)
  std::optional<double> cooperativity;

  ModeModel with_omega(double realized) const {
    ModeModel m = *this;
    m.omega = realized;
    return m;
  }
};

struct ResolutionEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double separation = 0.0;  ///< |omega_i - omega_j|
  double ratio = 0.0;       ///< separation / mean damping rate (inf when undamped)
};

/// A SystemConfig whose invariants have been checked, with derived
/// quantities cached. Immutable once built.
class ValidatedConfig {
public:
  const SystemConfig& config() const noexcept { return config_; }
  const CavityParams& cavity() const noexcept { return config_.cavity; }
  const SamplingGrid& grid() const noexcept { return config_.grid; }
  const std::vector<ModeModel>& modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return modes_.size(); }
  std::size_t dim() const noexcept { return 2 * modes_.size(); }
  double shot_noise_psd() const noexcept { return shot_noise_psd_; }
  const std::vector<ResolutionEntry>& resolution() const noexcept { return resolution_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Same physics on a different grid (used for decimated filter design).
  ValidatedConfig with_grid(const SamplingGrid& grid) const;

  bool operator==(const ValidatedConfig& other) const { return config_ == other.config_; }

private:
  friend ValidatedConfig validate(const SystemConfig& config);

  SystemConfig config_;
  std::vector<ModeModel> modes_;
  double shot_noise_psd_ = 0.0;
  std::vector<ResolutionEntry> resolution_;
  std::vector<std::string> warnings_;
};

/// 4 nbar g_eff^2 / (kappa gamma). Throws for an undamped oscillator.
double cooperativity(const OscillatorParams& osc, const CavityParams& cav);

/// Raw backaction diffusion scale 4 nbar g_eff^2 / kappa (= C gamma), defined for gamma = 0.
double backaction_rate(const OscillatorParams& osc, const CavityParams& cav);

/// kappa / (8 epsilon nbar).
double shot_noise_psd(const CavityParams& cav);

/// Reduced coupling and readout phase delay from the cavity susceptibility.
SidebandCorrection sideband_correction(const OscillatorParams& osc, const CavityParams& cav);

/// Raw coupling g that yields cooperativity `c` for this oscillator and cavity.
double coupling_for_cooperativity(double c, const OscillatorParams& osc, const CavityParams& cav);

ValidatedConfig validate(const SystemConfig& config);
inline ValidatedConfig validate(const ValidatedConfig& config) { return validate(config.config()); }

}  // namespace optoretro
