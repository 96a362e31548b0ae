#pragma once

#include "optoretro/rng.hpp"
#include "optoretro/types.hpp"

#include <nlohmann/json.hpp>

#include <span>

namespace optoretro {

/// Gaussian state of N modes over the quadratures (X1, P1, X2, P2, ...).
///
/// Convention: [X, P] = i, so the vacuum has variance 1/2 per quadrature and
/// a thermal state of occupation nu has variance nu + 1/2.
struct GaussianState {
  Vec mean;
  Mat cov;

  std::size_t modes() const noexcept { return static_cast<std::size_t>(mean.size() / 2); }
  /// Symmetrized second moments <Q Q^T> = cov + mean mean^T.
  Mat second_moments() const { return cov + mean * mean.transpose(); }
};

GaussianState thermal_state(std::span<const double> nu);

/// exp(1/2 (zeta* a^2 - zeta a^dag^2)) applied to vacuum, then displaced by alpha.
/// For real zeta > 0 the X quadrature is squeezed to exp(-2|zeta|)/2.
GaussianState single_mode_squeezed(Complex zeta, Complex displacement = {0.0, 0.0});

/// exp(z* a1 a2 - z a1^dag a2^dag) applied to the two-mode vacuum.
GaussianState two_mode_squeezed(Complex z);

/// Block-diagonal combination of independent states (modes of `a` first).
GaussianState direct_sum(const GaussianState& a, const GaussianState& b);

/// Squeezing magnitude |zeta| that gives `db` decibels (negative = squeezed).
double squeeze_parameter_from_db(double db);

/// Symplectic eigenvalues of a 2N x 2N covariance, ascending.
Vec symplectic_eigenvalues(const Mat& cov);

/// True when every symplectic eigenvalue is >= 1/2 - tol.
bool is_physical(const Mat& cov, double tol = 1e-9);

/// Throws unless cov is symmetric PSD and (optionally) satisfies the uncertainty bound.
void check_state(const GaussianState& state, bool strict);

/// Multivariate normal sampler built on an eigendecomposition of cov.
///
/// Eigenvalues down to -1e-10 * trace are clipped to zero; anything more
/// negative is rejected.
class GaussianSampler {
public:
  explicit GaussianSampler(const GaussianState& state);

  Vec operator()(Rng& rng) const;
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

private:
  Vec mean_;
  Mat factor_;
};

inline Vec sample(const GaussianState& state, Rng& rng) { return GaussianSampler(state)(rng); }

nlohmann::json state_to_json(const GaussianState& state);
GaussianState state_from_json(const nlohmann::json& doc);

}  // namespace optoretro
