#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zigzag/lattice.hpp"
#include "zigzag/params.hpp"

namespace zigzag {

struct IntegratorConfig {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h0 = 1e-3;    ///< initial step
  double hmax = 0.5;   ///< step-size ceiling
  double safety = 0.9; ///< step-controller safety factor
  std::vector<double> z_grid;  ///< sample distances, strictly increasing, starts at 0

  void validate() const;
};

struct IntegratorStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t rhs_evaluations = 0;
};

struct Trajectory {
  DimensionlessParams params;
  std::vector<LatticeState> states;  ///< aligned with the z grid
  IntegratorStats stats;
};

/// Right-hand side of the coupled-mode system,
///   dPsi_n/dZ = i [ lambda n Psi_n + alpha_minus sqrt(n) Psi_{n-1}
///                   + alpha_plus sqrt(n+1) Psi_{n+1}
///                   + beta (sqrt(n(n-1)) Psi_{n-2} + sqrt((n+1)(n+2)) Psi_{n+2}) ],
/// with out-of-range neighbours treated as zero at both ends. Equivalent to
/// -i H Psi with the truncated Hamiltonian.
void rhs(std::span<const Complex> psi, const DimensionlessParams& params,
         std::span<Complex> dpsi);

/// Precomputed stencil coefficients for repeated rhs evaluation.
class RhsStencil {
 public:
  RhsStencil(const DimensionlessParams& params, int sites);
  void operator()(std::span<const Complex> psi, std::span<Complex> dpsi) const;
  int sites() const { return static_cast<int>(diag_.size()); }

 private:
  std::vector<double> diag_, lower1_, upper1_, lower2_, upper2_;
};

/// Adaptive Runge-Kutta-Fehlberg 4(5) integration. Samples land exactly on
/// the grid points of cfg.z_grid by clipping the step size (no interpolation).
/// Throws std::runtime_error on step-size underflow or non-finite amplitudes.
Trajectory integrate(const LatticeState& initial, const DimensionlessParams& params,
                     const IntegratorConfig& cfg);

struct EdgeReport {
  bool flagged = false;
  double worst_ratio = 0.0;
  std::size_t worst_sample = 0;
};

/// Truncation-adequacy monitor: per sample, the intensity in the two
/// outermost sites relative to the peak intensity of that sample. Flags when
/// the worst ratio exceeds `threshold`.
EdgeReport edge_monitor(const Trajectory& traj, double threshold = 1e-8);

}  // namespace zigzag
