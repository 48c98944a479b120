#pragma once

#include <span>
#include <vector>

#include "zigzag/grid.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/params.hpp"

namespace zigzag {

/// Contexts with |4 beta^2 - lambda^2| at or below this are rejected: the
/// frame-change constants diverge as Gamma^2 -> 0.
inline constexpr double kGammaSqEpsilon = 1e-9;

/// Precomputed constants of the closed-form solver.
struct SolverContext {
  DimensionlessParams params;
  double gamma_sq = 0.0;    ///< Gamma^2 = 4 beta^2 - lambda^2
  Complex gamma{};          ///< principal square root of gamma_sq
  double zeta_plus = 0.0;   ///< (2 beta alpha_minus - lambda alpha_plus)/Gamma^2
  double zeta_minus = 0.0;  ///< (2 beta alpha_plus - lambda alpha_minus)/Gamma^2
  double f_const = 0.0;     ///< lambda/2 - [a+ a- lambda - beta(a-^2 + a+^2)]/Gamma^2
};

/// Builds the solver context. Throws std::domain_error for degenerate
/// parameters (|Gamma^2| <= kGammaSqEpsilon, the |lambda| = 2|beta| line).
SolverContext make_context(const DimensionlessParams& params);

/// The five Z-dependent quantities of the factorized evolution operator.
/// All vanish at Z = 0 and all are even functions of Gamma.
///
/// g0 carries the *unwrapped* logarithm: in the oscillatory regime the
/// principal value is shifted by 4*pi*i*k*sgn(lambda) with k counting the
/// crossings of the negative real axis by
/// w(Z) = cosh(Gamma Z) - i lambda sinh(Gamma Z)/Gamma, so that
/// exp(g0/4) follows the evolution continuously across Bloch periods.
struct ZFactors {
  double z = 0.0;
  Complex xi_plus{};   ///< displacement amplitude paired with alpha_minus
  Complex xi_minus{};  ///< displacement amplitude paired with alpha_plus
  Complex nu{};        ///< accumulated phase; real for real parameters
  Complex g0{};        ///< -2 log[cosh(Gamma Z) - i (lambda/Gamma) sinh(Gamma Z)], unwrapped
  Complex g1{};        ///< 2 i beta sinh(Gamma Z) / (Gamma cosh(Gamma Z) - i lambda sinh(Gamma Z))
};

ZFactors z_factors(double z, const SolverContext& ctx);

/// Displacement-block matrix element D_{k,n}: for k >= n
///   exp(-xi+ xi-/2) sqrt(n!/k!) (xi+)^(k-n) L_n^(k-n)(xi+ xi-),
/// and for k < n the mirrored form with (-xi-)^(n-k) and L_k^(n-k).
/// Assembled in log-magnitude + phase form to avoid factorial overflow.
Complex d_element(int k, int n, const ZFactors& zf);

/// Squeezing-block matrix element S_{m,k}; exactly zero for odd m+k. The
/// p-sum combines the g1 prefactor and 1/g1^p into one integer power of
/// g1/2, so g1 = 0 never divides.
Complex s_element(int m, int k, const ZFactors& zf);

/// Truncation control for the infinite k-sum of the propagator.
struct TruncationPolicy {
  double tail_tol = 1e-14;    ///< |term| relative to max(1, |partial sum|)
  int consecutive_below = 4;  ///< tail terms below tolerance before stopping
  int k_max = 400;            ///< hard cap; must be >= input_site + 20

  void validate(int input_site) const;
};

struct Amplitude {
  Complex value{};
  bool truncated = false;  ///< k_max hit before the tail converged
};

/// Evaluates single-site-input amplitudes for one (input site, Z) pair,
/// reusing the displacement column across output sites. Not safe for
/// concurrent use of one instance; use one instance per thread.
class ColumnEvaluator {
 public:
  ColumnEvaluator(const ZFactors& zf, int input_site, const TruncationPolicy& pol);

  /// Psi^(input_site)_site(Z) = exp(-i nu) sum_k S_{site,k} D_{k,input_site}.
  Amplitude at(int site);

 private:
  Complex displacement(int k);

  ZFactors zf_;
  int input_site_;
  TruncationPolicy pol_;
  Complex global_phase_;
  std::vector<Complex> d_cache_;
};

/// Closed-form amplitude at a single cell.
Amplitude amplitude(int input_site, int site, double z, const SolverContext& ctx,
                    const TruncationPolicy& pol = {});

struct PropagatedState {
  LatticeState state;
  bool truncated = false;
};

/// Propagates an arbitrary superposition by linearity:
/// Psi_m(Z) = sum_n c_n Psi^(n)_m(Z). `site_count` < 0 means initial.size().
PropagatedState propagate(std::span<const Complex> initial, double z,
                          const SolverContext& ctx, const TruncationPolicy& pol = {},
                          int site_count = -1);

/// |Psi^(input_site)_m(Z)|^2 over the (z_grid, [m_lo, m_hi]) rectangle with
/// per-cell truncation flags. Columns are evaluated in parallel when
/// `threads` > 1; the result does not depend on the thread count.
PropagationGrid intensity_map(int input_site, std::span<const double> z_grid,
                              int m_lo, int m_hi, const SolverContext& ctx,
                              const TruncationPolicy& pol = {}, int threads = 1);

struct XiCurves {
  std::vector<double> z;
  std::vector<double> re_plus, im_plus;
  std::vector<double> re_minus, im_minus;
};

/// Sampled real/imaginary parts of xi+-(Z); their relative size decides the
/// amplification versus attenuation regime.
XiCurves xi_curves(std::span<const double> z_grid, const SolverContext& ctx);

}  // namespace zigzag
