#include "optoretro/model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace optoretro {

SamplingGrid::SamplingGrid(double fs, double tf) : fs_(fs), tf_(tf) {
  if (!(fs > 0.0) || !std::isfinite(fs)) {
    throw ValidationError("grid.fs", fmt::format("sample rate must be positive, got {}", fs));
  }
  if (!(tf > 0.0) || !std::isfinite(tf)) {
    throw ValidationError("grid.tf", fmt::format("duration must be positive, got {}", tf));
  }
  const double n = std::round(fs * tf);
  if (n < 2.0) {
    throw ValidationError("grid.nt", fmt::format("fs*tf must give at least 2 samples, got {}", n));
  }
  nt_ = static_cast<std::size_t>(n);
}

SamplingGrid SamplingGrid::decimated(std::size_t factor) const {
  if (factor == 0) throw Error("decimation factor must be >= 1");
  if (factor == 1) return *this;
  SamplingGrid g;
  g.fs_ = fs_ / static_cast<double>(factor);
  g.tf_ = tf_;
  g.nt_ = (nt_ + factor - 1) / factor;
  return g;
}

double shot_noise_psd(const CavityParams& cav) {
  if (cav.nbar <= 0.0) throw ValidationError("cavity.nbar", "no probe light: infinite shot noise");
  if (cav.epsilon <= 0.0) throw ValidationError("cavity.epsilon", "detection efficiency must be > 0");
  return cav.kappa / (8.0 * cav.epsilon * cav.nbar);
}

SidebandCorrection sideband_correction(const OscillatorParams& osc, const CavityParams& cav) {
  if (!(cav.kappa > 100.0 * osc.gamma)) {
    throw ValidationError("cavity.kappa",
                          fmt::format("resolved-sideband regime outside model validity "
                                      "(kappa = {} must exceed 100 * gamma = {})",
                                      cav.kappa, 100.0 * osc.gamma));
  }
  if (osc.omega == 0.0) return {osc.g, 0.0};
  return {osc.g * cav.kappa / std::hypot(cav.kappa, osc.omega), std::atan(osc.omega / cav.kappa)};
}

double backaction_rate(const OscillatorParams& osc, const CavityParams& cav) {
  const double g_eff = sideband_correction(osc, cav).g_eff;
  return 4.0 * cav.nbar * g_eff * g_eff / cav.kappa;
}

double cooperativity(const OscillatorParams& osc, const CavityParams& cav) {
  if (osc.gamma <= 0.0) {
    throw ValidationError("oscillator.gamma",
                          "undamped oscillator: cooperativity undefined; use raw diffusion rate");
  }
  return backaction_rate(osc, cav) / osc.gamma;
}

double coupling_for_cooperativity(double c, const OscillatorParams& osc, const CavityParams& cav) {
  if (osc.gamma <= 0.0) {
    throw ValidationError("oscillator.gamma", "cooperativity input requires gamma > 0");
  }
  if (c < 0.0) throw ValidationError("oscillator.cooperativity", "must be >= 0");
  if (cav.nbar <= 0.0 || cav.kappa <= 0.0) {
    throw ValidationError("cavity", "cooperativity input requires kappa > 0 and nbar > 0");
  }
  const double g_eff = std::sqrt(c * osc.gamma * cav.kappa / (4.0 * cav.nbar));
  return g_eff * std::hypot(cav.kappa, osc.omega) / cav.kappa;
}

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field, what);
}

void check_oscillator(const OscillatorParams& o, std::size_t i) {
  const auto f = [i](const char* name) { return fmt::format("oscillators[{}].{}", i, name); };
  require(std::isfinite(o.omega) && o.omega != 0.0, f("omega"), "|omega| must be > 0");
  require(o.gamma >= 0.0 && std::isfinite(o.gamma), f("gamma"), "must be >= 0");
  require(o.g > 0.0 && std::isfinite(o.g), f("g"), "must be > 0");
  require(o.nu >= 0.0 && std::isfinite(o.nu), f("nu"), "must be >= 0");
  require(o.sigma >= 0.0 && std::isfinite(o.sigma), f("sigma"), "must be >= 0");
  require(o.extra_diffusion >= 0.0 && std::isfinite(o.extra_diffusion), f("extra_diffusion"),
          "must be >= 0");
}

}  // namespace

ValidatedConfig validate(const SystemConfig& config) {
  const auto& cav = config.cavity;
  require(cav.kappa > 0.0 && std::isfinite(cav.kappa), "cavity.kappa", "must be > 0");
  require(cav.nbar >= 0.0 && std::isfinite(cav.nbar), "cavity.nbar", "must be >= 0");
  require(cav.epsilon > 0.0 && cav.epsilon <= 1.0, "cavity.epsilon",
          fmt::format("must lie in (0, 1], got {}", cav.epsilon));
  require(!config.oscillators.empty(), "oscillators", "at least one oscillator is required");
  require(config.grid.nt() >= 2, "grid.nt", "at least 2 samples are required");

  ValidatedConfig out;
  out.config_ = config;

  double max_abs_omega = 0.0;
  for (std::size_t i = 0; i < config.oscillators.size(); ++i) {
    const auto& o = config.oscillators[i];
    check_oscillator(o, i);
    max_abs_omega = std::max(max_abs_omega, std::abs(o.omega));

    const auto sb = sideband_correction(o, cav);
    ModeModel m;
    m.omega = o.omega;
    m.gamma = o.gamma;
    m.g_eff = sb.g_eff;
    m.phi = sb.phi;
    m.nu = o.nu;
    m.sigma = o.sigma;
    m.thermal_rate = o.gamma * (o.nu + 0.5) + o.extra_diffusion;
    const double ba = 4.0 * cav.nbar * sb.g_eff * sb.g_eff / cav.kappa;
    m.backaction_coupling = std::sqrt(2.0 * ba);
    if (o.gamma > 0.0) m.cooperativity = ba / o.gamma;
    out.modes_.push_back(m);

    if (std::abs(o.omega) < 10.0 * o.gamma) {
      out.warnings_.push_back(fmt::format(
          "oscillators[{}]: |omega| < 10 gamma, high-Q approximations are unreliable", i));
    }
  }

  const double fs_min = 20.0 * max_abs_omega / kTwoPi;
  require(config.grid.fs() > fs_min, "grid.fs",
          fmt::format("sample rate {} Hz must exceed 20 max|omega|/2pi = {} Hz", config.grid.fs(),
                      fs_min));

  out.shot_noise_psd_ =
      cav.nbar > 0.0 ? shot_noise_psd(cav) : std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < out.modes_.size(); ++i) {
    for (std::size_t j = i + 1; j < out.modes_.size(); ++j) {
      const auto& a = out.modes_[i];
      const auto& b = out.modes_[j];
      ResolutionEntry e{i, j, std::abs(a.omega - b.omega), 0.0};
      const double mean_gamma = 0.5 * (a.gamma + b.gamma);
      e.ratio = mean_gamma > 0.0 ? e.separation / mean_gamma
                                 : std::numeric_limits<double>::infinity();
      out.resolution_.push_back(e);
    }
  }
  return out;
}

ValidatedConfig ValidatedConfig::with_grid(const SamplingGrid& grid) const {
  ValidatedConfig out = *this;
  out.config_.grid = grid;
  return out;
}

}  // namespace optoretro
