#include "zigzag/su11.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "zigzag/lattice.hpp"
#include "zigzag/special.hpp"

namespace zigzag {

namespace {

// sinh(sqrt(a)/2)/sqrt(a); even in the square-root branch. Series near a = 0.
Complex sinh_half_over_root(Complex a) {
  if (std::abs(a) < 1e-4) {
    return 0.5 * (1.0 + a * (1.0 / 24.0) + a * a * (1.0 / 1920.0) +
                  a * a * a * (1.0 / 322560.0));
  }
  const Complex r = std::sqrt(a);
  return std::sinh(0.5 * r) / r;
}

Complex cosh_half(Complex a) { return std::cosh(0.5 * std::sqrt(a)); }

}  // namespace

Mat2 mat2_multiply(const Mat2& a, const Mat2& b) {
  return Mat2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
              a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

FactoredForm disentangle(const TripleCoefficients& t) {
  const Complex discr = t.a0 * t.a0 - 4.0 * t.a_plus * t.a_minus;
  const Complex shc = sinh_half_over_root(discr);
  const Complex exp_neg_half_g = cosh_half(discr) - t.a0 * shc;
  if (std::abs(exp_neg_half_g) <= 1e-13)
    throw std::domain_error("factored form does not exist at this point");
  FactoredForm out;
  out.g = -2.0 * std::log(exp_neg_half_g);
  out.f = 2.0 * t.a_plus * shc / exp_neg_half_g;
  out.h = 2.0 * t.a_minus * shc / exp_neg_half_g;
  return out;
}

Mat2 su11_closed_form_2x2(const TripleCoefficients& t) {
  const Complex discr = t.a0 * t.a0 - 4.0 * t.a_plus * t.a_minus;
  const Complex shc = sinh_half_over_root(discr);
  const Complex ch = cosh_half(discr);
  return Mat2{ch + t.a0 * shc, 2.0 * t.a_plus * shc,
              -2.0 * t.a_minus * shc, ch - t.a0 * shc};
}

Mat2 factored_product_2x2(const FactoredForm& ff) {
  const Complex eng = ff.exp_neg_half_g();
  const Complex epg = 1.0 / eng;
  return Mat2{epg - ff.f * eng * ff.h, ff.f * eng, -eng * ff.h, eng};
}

Complex fock_element_kminus(int m, int n, Complex h) {
  if (m < 0 || n < 0) throw std::invalid_argument("Fock indices must be >= 0");
  if (n < m || (n - m) % 2 != 0) return Complex(0.0, 0.0);
  const int j = (n - m) / 2;
  if (j == 0) return Complex(1.0, 0.0);
  const Complex base = 0.5 * h;
  if (base == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
  const double logmag = 0.5 * (log_factorial(n) - log_factorial(m)) +
                        j * std::log(std::abs(base)) - log_factorial(j);
  return std::polar(std::exp(logmag), j * std::arg(base));
}

Complex fock_element_kplus(int m, int n, Complex f) {
  return fock_element_kminus(n, m, f);
}

Complex s_via_elements(int m, int k, Complex g0, Complex g1) {
  if (m < 0 || k < 0) throw std::invalid_argument("Fock indices must be >= 0");
  if ((m + k) % 2 != 0) return Complex(0.0, 0.0);
  Complex sum(0.0, 0.0);
  const int j_hi = std::min(m, k);
  for (int j = m % 2; j <= j_hi; j += 2) {
    sum += fock_element_kplus(m, j, g1) * std::exp(g0 * (0.5 * j + 0.25)) *
           fock_element_kminus(j, k, g1);
  }
  return sum;
}

DenseOperator::DenseOperator(int dim)
    : dim_(dim), entries_(static_cast<std::size_t>(dim) * dim, Complex(0.0, 0.0)) {
  if (dim < 1) throw std::invalid_argument("operator dimension must be >= 1");
}

DenseOperator DenseOperator::identity(int dim) {
  DenseOperator out(dim);
  for (int i = 0; i < dim; ++i) out.at(i, i) = Complex(1.0, 0.0);
  return out;
}

DenseOperator DenseOperator::operator*(const DenseOperator& rhs) const {
  if (rhs.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
  DenseOperator out(dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int k = 0; k < dim_; ++k) {
      const Complex aik = at(i, k);
      if (aik == Complex(0.0, 0.0)) continue;
      const std::size_t row_k = static_cast<std::size_t>(k) * dim_;
      const std::size_t row_i = static_cast<std::size_t>(i) * dim_;
      for (int j = 0; j < dim_; ++j)
        out.entries_[row_i + j] += aik * rhs.entries_[row_k + j];
    }
  }
  return out;
}

DenseOperator& DenseOperator::operator+=(const DenseOperator& rhs) {
  if (rhs.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
  return *this;
}

DenseOperator& DenseOperator::operator*=(Complex s) {
  for (Complex& v : entries_) v *= s;
  return *this;
}

double DenseOperator::one_norm() const {
  double best = 0.0;
  for (int c = 0; c < dim_; ++c) {
    double col = 0.0;
    for (int r = 0; r < dim_; ++r) col += std::abs(at(r, c));
    best = std::max(best, col);
  }
  return best;
}

std::vector<Complex> DenseOperator::column(int c) const {
  std::vector<Complex> out(static_cast<std::size_t>(dim_));
  for (int r = 0; r < dim_; ++r) out[static_cast<std::size_t>(r)] = at(r, c);
  return out;
}

DenseOperator annihilation_matrix(int dim) {
  DenseOperator a(dim);
  for (int n = 1; n < dim; ++n) a.at(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

DenseOperator creation_matrix(int dim) {
  DenseOperator a(dim);
  for (int n = 0; n + 1 < dim; ++n) a.at(n + 1, n) = std::sqrt(n + 1.0);
  return a;
}

DenseOperator expm(const DenseOperator& a) {
  int squarings = 0;
  double norm = a.one_norm();
  while (norm > 0.5 && squarings < 64) {
    norm *= 0.5;
    ++squarings;
  }
  if (norm > 0.5)
    throw std::runtime_error("matrix exponential: norm too large to scale down");

  DenseOperator scaled = a;
  scaled *= Complex(std::ldexp(1.0, -squarings), 0.0);

  DenseOperator sum = DenseOperator::identity(a.dim());
  DenseOperator term = DenseOperator::identity(a.dim());
  bool converged = false;
  for (int order = 1; order <= 128; ++order) {
    term = term * scaled;
    term *= Complex(1.0 / order, 0.0);
    sum += term;
    if (term.one_norm() <= std::numeric_limits<double>::epsilon() * sum.one_norm()) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("matrix exponential: Taylor series did not converge");

  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

DenseOperator dense_oracle(const DimensionlessParams& params, int dim, double z) {
  if (dim < 20) throw std::invalid_argument("oracle dimension must be >= 20");
  const TruncatedHamiltonian h = build_hamiltonian(params, dim);
  DenseOperator gen(dim);
  const Complex miz(0.0, -z);  // exp(-i H Z)
  for (int r = 0; r < dim; ++r)
    for (int c = std::max(0, r - 2); c <= std::min(dim - 1, r + 2); ++c)
      gen.at(r, c) = miz * h.at(r, c);
  return expm(gen);
}

std::vector<Complex> oracle_column(const DimensionlessParams& params, int dim,
                                   double z, int site) {
  for (int d = std::max(dim, 20); d <= 320; d *= 2) {
    if (site >= d) throw std::invalid_argument("input site outside the oracle basis");
    const std::vector<Complex> col = dense_oracle(params, d, z).column(site);
    double peak = 0.0;
    for (const Complex& v : col) peak = std::max(peak, std::abs(v));
    double top = 0.0;
    for (int r = d - 10; r < d; ++r) top = std::max(top, std::abs(col[static_cast<std::size_t>(r)]));
    if (peak == 0.0 || top <= 1e-10 * peak) return col;
  }
  throw std::runtime_error(
      "dense oracle: truncation contamination persists up to dimension 320");
}

}  // namespace zigzag
