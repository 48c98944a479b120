#include "zigzag/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace zigzag {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be finite");
}

}  // namespace

double rate_per_cm(double value, RateUnit unit) {
  switch (unit) {
    case RateUnit::per_cm: return value;
    case RateUnit::per_mm: return value * 10.0;
  }
  throw std::invalid_argument("unknown rate unit");
}

void PhysicalParams::validate() const {
  if (!(coupling > 0.0)) throw std::invalid_argument("reference coupling C must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("decay length kappa must be > 0");
  require_finite(gradient, "gradient alpha0");
  require_finite(mu, "mu");
  require_finite(d1, "d1");
  require_finite(d2, "d2");
  require_finite(alpha_plus, "alpha_plus");
  require_finite(alpha_minus, "alpha_minus");
  require_finite(beta, "beta");
}

void DimensionlessParams::validate() const {
  require_finite(lambda, "lambda");
  require_finite(alpha_plus, "alpha_plus");
  require_finite(alpha_minus, "alpha_minus");
  require_finite(beta, "beta");
}

Nondimensionalized nondimensionalize(const PhysicalParams& p) {
  p.validate();
  Nondimensionalized out;
  out.params.lambda = p.gradient / p.coupling;
  out.params.alpha_plus = p.alpha_plus;
  out.params.alpha_minus = p.alpha_minus;
  out.params.beta = p.beta;
  out.z_scale = p.coupling;
  return out;
}

LatticeState single_site_state(int site, int sites) {
  if (sites < 5) throw std::invalid_argument("lattice needs at least 5 sites");
  if (site < 0 || site >= sites)
    throw std::invalid_argument("input site outside the lattice");
  LatticeState s;
  s.amplitudes.assign(static_cast<std::size_t>(sites), Complex(0.0, 0.0));
  s.amplitudes[static_cast<std::size_t>(site)] = Complex(1.0, 0.0);
  return s;
}

double coupling_first(int n, Side side, const PhysicalParams& p) {
  p.validate();
  if (n < 0) throw std::invalid_argument("site index must be >= 0");
  if (n == 0) return 0.0;  // boundary: no neighbour below site 0
  const double amp = (side == Side::minus) ? p.alpha_minus : p.alpha_plus;
  const double dn = p.d1 - 0.5 * p.kappa * std::log(static_cast<double>(n));
  return amp * p.coupling * std::exp(-(dn - p.d1) / p.kappa);
}

double coupling_second(int n, const PhysicalParams& p) {
  p.validate();
  if (n < 0) throw std::invalid_argument("site index must be >= 0");
  if (n < 2) return 0.0;
  const double pair = static_cast<double>(n) * static_cast<double>(n - 1);
  const double dn = p.d2 - 0.5 * p.kappa * std::log(pair);
  return p.beta * p.coupling * std::exp(-(dn - p.d2) / p.kappa);
}

TruncatedHamiltonian::TruncatedHamiltonian(int sites)
    : sites_(sites), entries_(static_cast<std::size_t>(sites) * sites, Complex(0.0, 0.0)) {
  if (sites < 5) throw std::invalid_argument("lattice needs at least 5 sites");
}

void TruncatedHamiltonian::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (static_cast<int>(x.size()) != sites_ || static_cast<int>(y.size()) != sites_)
    throw std::invalid_argument("state length does not match the lattice");
  for (int m = 0; m < sites_; ++m) {
    Complex acc(0.0, 0.0);
    const int lo = std::max(0, m - 2);
    const int hi = std::min(sites_ - 1, m + 2);
    for (int n = lo; n <= hi; ++n) acc += at(m, n) * x[static_cast<std::size_t>(n)];
    y[static_cast<std::size_t>(m)] = acc;
  }
}

TruncatedHamiltonian build_hamiltonian(const DimensionlessParams& params, int sites) {
  params.validate();
  TruncatedHamiltonian h(sites);
  for (int n = 0; n < sites; ++n) {
    const double dn = static_cast<double>(n);
    h.at(n, n) = -params.lambda * dn;
    if (n >= 1) h.at(n, n - 1) = -params.alpha_minus * std::sqrt(dn);
    if (n + 1 < sites) h.at(n, n + 1) = -params.alpha_plus * std::sqrt(dn + 1.0);
    if (n >= 2) h.at(n, n - 2) = -params.beta * std::sqrt(dn * (dn - 1.0));
    if (n + 2 < sites) h.at(n, n + 2) = -params.beta * std::sqrt((dn + 1.0) * (dn + 2.0));
  }
  return h;
}

double bloch_period(double lambda, double beta) {
  const double disc = lambda * lambda - 4.0 * beta * beta;
  if (!(disc > 0.0))
    throw std::domain_error(
        "no oscillatory regime: lambda^2 <= 4 beta^2 gives hyperbolic dynamics");
  return 2.0 * std::numbers::pi / std::sqrt(disc);
}

}  // namespace zigzag
