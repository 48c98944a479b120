#pragma once

#include <complex>

namespace zigzag {

using Complex = std::complex<double>;

/// Unit tag for rate-like inputs (couplings, index gradients).
enum class RateUnit { per_cm, per_mm };

/// Converts a rate given in `unit` to the canonical 1/cm.
double rate_per_cm(double value, RateUnit unit);

/// Dimensional description of the waveguide array. Rates are stored in
/// 1/cm, distances in micrometers.
struct PhysicalParams {
  double coupling = 1.0;     ///< reference coupling C (1/cm), must be > 0
  double gradient = 0.0;     ///< propagation-constant gradient alpha0 (1/cm)
  double mu = 0.0;           ///< base propagation constant (1/cm); global phase only
  double d1 = 0.0;           ///< nearest-neighbour reference distance (um)
  double d2 = 0.0;           ///< next-nearest-neighbour reference distance (um)
  double kappa = 1.0;        ///< evanescent decay length (um), must be > 0
  double alpha_plus = 0.0;   ///< forward hopping amplitude (dimensionless)
  double alpha_minus = 0.0;  ///< backward hopping amplitude (dimensionless)
  double beta = 0.0;         ///< second-neighbour hopping amplitude (dimensionless)

  void validate() const;  // throws std::invalid_argument on violation
};

/// The four constants of the dimensionless coupled-mode equations.
struct DimensionlessParams {
  double lambda = 0.0;  ///< on-site gradient, alpha0 / C
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  double beta = 0.0;

  bool hermitian() const { return alpha_plus == alpha_minus; }
  void validate() const;
};

struct Nondimensionalized {
  DimensionlessParams params;
  double z_scale = 1.0;  ///< Z = z_scale * z with z in cm
};

/// Maps the dimensional model to the dimensionless one: lambda = alpha0/C,
/// Z = C z; the hopping amplitudes pass through unchanged.
Nondimensionalized nondimensionalize(const PhysicalParams& p);

}  // namespace zigzag
