#pragma once

#include <span>
#include <vector>

#include "zigzag/params.hpp"

namespace zigzag {

/// Complex field amplitudes on the truncated lattice at one propagation
/// distance Z.
struct LatticeState {
  double z = 0.0;
  std::vector<Complex> amplitudes;
};

/// Unit excitation of `site` on a lattice of `sites` waveguides.
LatticeState single_site_state(int site, int sites);

enum class Side { minus, plus };

/// First-neighbour coupling of site n, evaluated through the
/// exponential-distance law with d1_n = d1 - (kappa/2) ln n. Reduces to
/// alpha * C * sqrt(n); n = 0 returns 0 (boundary).
double coupling_first(int n, Side side, const PhysicalParams& p);

/// Second-neighbour coupling, d2_n = d2 - (kappa/2) ln[n(n-1)]; equals
/// beta * C * sqrt(n(n-1)), zero for n < 2.
double coupling_second(int n, const PhysicalParams& p);

/// Dense storage of the pentadiagonal lattice Hamiltonian (bandwidth 2).
class TruncatedHamiltonian {
 public:
  explicit TruncatedHamiltonian(int sites);

  int sites() const { return sites_; }
  Complex& at(int m, int n) { return entries_[index(m, n)]; }
  Complex at(int m, int n) const { return entries_[index(m, n)]; }

  /// y = H x using only the band, O(sites).
  void apply(std::span<const Complex> x, std::span<Complex> y) const;

 private:
  std::size_t index(int m, int n) const {
    return static_cast<std::size_t>(m) * sites_ + n;
  }

  int sites_;
  std::vector<Complex> entries_;
};

/// Hamiltonian of i dPsi/dZ = H Psi on `sites` waveguides:
///   H[n,n] = -lambda n, H[n,n-1] = -alpha_minus sqrt(n),
///   H[n,n+1] = -alpha_plus sqrt(n+1), H[n,n+-2] = -beta sqrt(...).
/// Non-Hermitian exactly when alpha_plus != alpha_minus. Requires sites >= 5.
TruncatedHamiltonian build_hamiltonian(const DimensionlessParams& params, int sites);

/// Spatial Bloch-oscillation period 2*pi/sqrt(lambda^2 - 4 beta^2).
/// Throws std::domain_error when lambda^2 <= 4 beta^2 (hyperbolic regime,
/// no oscillation).
double bloch_period(double lambda, double beta);

}  // namespace zigzag
