#pragma once

#include <array>
#include <vector>

#include "zigzag/params.hpp"

namespace zigzag {

/// Coefficients of exp(A+ K+ + A0 K0 + A- K-) in the su(1,1) algebra
/// with K+ = a^dag^2/2, K- = a^2/2, K0 = (a^dag a + 1/2)/2.
struct TripleCoefficients {
  Complex a_plus{};
  Complex a0{};
  Complex a_minus{};
};

/// Result of the normal-ordered split exp(f K+) exp(g K0) exp(h K-).
struct FactoredForm {
  Complex f{};
  Complex g{};
  Complex h{};

  Complex exp_neg_half_g() const { return std::exp(-0.5 * g); }
};

/// Row-major 2x2 complex matrix: { m00, m01, m10, m11 }.
using Mat2 = std::array<Complex, 4>;

Mat2 mat2_multiply(const Mat2& a, const Mat2& b);

/// Normal-order disentangling via the 2x2 representation. With
/// discr = A0^2 - 4 A+ A-:
///   exp(-g/2) = cosh(sqrt(discr)/2) - A0 sinh(sqrt(discr)/2)/sqrt(discr),
///   f = 2 A+ sinh(sqrt(discr)/2)/sqrt(discr) / exp(-g/2),  h likewise with A-.
/// Every expression is even in sqrt(discr), so the square-root branch does
/// not matter; discr = 0 is handled by series. Throws std::domain_error when
/// exp(-g/2) vanishes (|.| <= 1e-13): the factored form does not exist there.
FactoredForm disentangle(const TripleCoefficients& t);

/// Closed form of exp(A+ K+ + A0 K0 + A- K-) in the 2x2 representation.
Mat2 su11_closed_form_2x2(const TripleCoefficients& t);

/// exp(f K+) exp(g K0) exp(h K-) in the 2x2 representation.
Mat2 factored_product_2x2(const FactoredForm& ff);

/// <m| exp(h K-) |n> = sqrt(n!/m!) (h/2)^((n-m)/2) / ((n-m)/2)! for n >= m
/// with n-m even; zero otherwise.
Complex fock_element_kminus(int m, int n, Complex h);

/// <m| exp(f K+) |n>, the transpose-symmetric counterpart.
Complex fock_element_kplus(int m, int n, Complex f);

/// <m| exp(g1 K+) exp(g0 K0) exp(g1 K-) |k> contracted through the number
/// basis; a finite parity-restricted sum. Independent check of the
/// squeezing-block matrix elements used by the closed-form propagator.
Complex s_via_elements(int m, int k, Complex g0, Complex g1);

/// Dense complex matrix on the truncated number basis.
class DenseOperator {
 public:
  explicit DenseOperator(int dim);
  static DenseOperator identity(int dim);

  int dim() const { return dim_; }
  Complex& at(int r, int c) { return entries_[index(r, c)]; }
  Complex at(int r, int c) const { return entries_[index(r, c)]; }

  DenseOperator operator*(const DenseOperator& rhs) const;
  DenseOperator& operator+=(const DenseOperator& rhs);
  DenseOperator& operator*=(Complex s);

  double one_norm() const;  ///< max column sum of magnitudes
  std::vector<Complex> column(int c) const;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * dim_ + c;
  }

  int dim_;
  std::vector<Complex> entries_;
};

/// a|n> = sqrt(n)|n-1> on the truncated basis.
DenseOperator annihilation_matrix(int dim);
/// a^dag|n> = sqrt(n+1)|n+1>; the top corner is a truncation artifact.
DenseOperator creation_matrix(int dim);

/// Matrix exponential by scaling-and-squaring Taylor series; the squaring
/// count comes from the one-norm. Throws std::runtime_error if the series
/// fails to converge.
DenseOperator expm(const DenseOperator& a);

/// Ground-truth propagator exp(-i H Z) on a `dim`-site truncation.
/// Requires dim >= 20.
DenseOperator dense_oracle(const DimensionlessParams& params, int dim, double z);

/// Column `site` of the dense propagator with truncation contamination
/// under control: the top 10 entries must stay below 1e-10 of the column
/// peak, otherwise the dimension is doubled (up to 320, then throws).
std::vector<Complex> oracle_column(const DimensionlessParams& params, int dim,
                                   double z, int site);

}  // namespace zigzag
