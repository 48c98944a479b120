#include "zigzag/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace zigzag {

namespace {

// Fehlberg 4(5) tableau.
constexpr double kA21 = 1.0 / 4.0;
constexpr double kA31 = 3.0 / 32.0, kA32 = 9.0 / 32.0;
constexpr double kA41 = 1932.0 / 2197.0, kA42 = -7200.0 / 2197.0, kA43 = 7296.0 / 2197.0;
constexpr double kA51 = 439.0 / 216.0, kA52 = -8.0, kA53 = 3680.0 / 513.0,
                 kA54 = -845.0 / 4104.0;
constexpr double kA61 = -8.0 / 27.0, kA62 = 2.0, kA63 = -3544.0 / 2565.0,
                 kA64 = 1859.0 / 4104.0, kA65 = -11.0 / 40.0;
// Fifth-order weights and the (fifth minus fourth) error weights.
constexpr double kB1 = 16.0 / 135.0, kB3 = 6656.0 / 12825.0, kB4 = 28561.0 / 56430.0,
                 kB5 = -9.0 / 50.0, kB6 = 2.0 / 55.0;
constexpr double kE1 = 1.0 / 360.0, kE3 = -128.0 / 4275.0, kE4 = -2197.0 / 75240.0,
                 kE5 = 1.0 / 50.0, kE6 = 2.0 / 55.0;

[[noreturn]] void fail(const char* what, double z) {
  std::ostringstream msg;
  msg << what << " at Z = " << z;
  throw std::runtime_error(msg.str());
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0))
    throw std::invalid_argument("integrator tolerances must be > 0");
  if (!(h0 > 0.0) || !(hmax > 0.0))
    throw std::invalid_argument("integrator step sizes must be > 0");
  if (!(safety > 0.0) || safety >= 1.0)
    throw std::invalid_argument("safety factor must lie in (0, 1)");
  if (z_grid.size() < 2) throw std::invalid_argument("z grid needs at least two samples");
  if (z_grid.front() != 0.0) throw std::invalid_argument("z grid must start at 0");
  for (std::size_t i = 1; i < z_grid.size(); ++i)
    if (!(z_grid[i] > z_grid[i - 1]))
      throw std::invalid_argument("z grid must be strictly increasing");
}

RhsStencil::RhsStencil(const DimensionlessParams& params, int sites) {
  params.validate();
  if (sites < 5) throw std::invalid_argument("lattice needs at least 5 sites");
  const std::size_t n_sites = static_cast<std::size_t>(sites);
  diag_.resize(n_sites);
  lower1_.resize(n_sites);
  upper1_.resize(n_sites);
  lower2_.resize(n_sites);
  upper2_.resize(n_sites);
  for (std::size_t n = 0; n < n_sites; ++n) {
    const double dn = static_cast<double>(n);
    diag_[n] = params.lambda * dn;
    lower1_[n] = params.alpha_minus * std::sqrt(dn);
    upper1_[n] = params.alpha_plus * std::sqrt(dn + 1.0);
    lower2_[n] = params.beta * std::sqrt(dn * (dn - 1.0));
    upper2_[n] = params.beta * std::sqrt((dn + 1.0) * (dn + 2.0));
  }
}

void RhsStencil::operator()(std::span<const Complex> psi, std::span<Complex> dpsi) const {
  const std::size_t n_sites = diag_.size();
  if (psi.size() != n_sites || dpsi.size() != n_sites)
    throw std::invalid_argument("state length does not match the stencil");
  for (std::size_t n = 0; n < n_sites; ++n) {
    Complex acc = diag_[n] * psi[n];
    if (n >= 1) acc += lower1_[n] * psi[n - 1];
    if (n + 1 < n_sites) acc += upper1_[n] * psi[n + 1];
    if (n >= 2) acc += lower2_[n] * psi[n - 2];
    if (n + 2 < n_sites) acc += upper2_[n] * psi[n + 2];
    dpsi[n] = Complex(-acc.imag(), acc.real());  // i * acc
  }
}

void rhs(std::span<const Complex> psi, const DimensionlessParams& params,
         std::span<Complex> dpsi) {
  RhsStencil(params, static_cast<int>(psi.size()))(psi, dpsi);
}

Trajectory integrate(const LatticeState& initial, const DimensionlessParams& params,
                     const IntegratorConfig& cfg) {
  cfg.validate();
  const std::size_t n = initial.amplitudes.size();
  if (n < 5) throw std::invalid_argument("lattice needs at least 5 sites");
  if (initial.z != cfg.z_grid.front())
    throw std::invalid_argument("initial state must sit on the first grid point");

  const RhsStencil stencil(params, static_cast<int>(n));

  Trajectory out;
  out.params = params;
  out.states.reserve(cfg.z_grid.size());
  out.states.push_back(initial);

  std::vector<Complex> y = initial.amplitudes;
  std::vector<Complex> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), stage(n), y_next(n);

  double z = cfg.z_grid.front();
  double h = std::min(cfg.h0, cfg.hmax);

  for (std::size_t target_idx = 1; target_idx < cfg.z_grid.size(); ++target_idx) {
    const double target = cfg.z_grid[target_idx];
    bool at_target = false;
    while (!at_target) {
      double step = std::min(h, cfg.hmax);
      bool clipped = false;
      if (z + step >= target) {
        step = target - z;
        clipped = true;
      }

      stencil(y, k1);
      for (std::size_t i = 0; i < n; ++i) stage[i] = y[i] + step * (kA21 * k1[i]);
      stencil(stage, k2);
      for (std::size_t i = 0; i < n; ++i)
        stage[i] = y[i] + step * (kA31 * k1[i] + kA32 * k2[i]);
      stencil(stage, k3);
      for (std::size_t i = 0; i < n; ++i)
        stage[i] = y[i] + step * (kA41 * k1[i] + kA42 * k2[i] + kA43 * k3[i]);
      stencil(stage, k4);
      for (std::size_t i = 0; i < n; ++i)
        stage[i] = y[i] + step * (kA51 * k1[i] + kA52 * k2[i] + kA53 * k3[i] + kA54 * k4[i]);
      stencil(stage, k5);
      for (std::size_t i = 0; i < n; ++i)
        stage[i] = y[i] + step * (kA61 * k1[i] + kA62 * k2[i] + kA63 * k3[i] +
                                  kA64 * k4[i] + kA65 * k5[i]);
      stencil(stage, k6);
      out.stats.rhs_evaluations += 6;

      double err_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        y_next[i] = y[i] + step * (kB1 * k1[i] + kB3 * k3[i] + kB4 * k4[i] +
                                   kB5 * k5[i] + kB6 * k6[i]);
        const Complex diff = step * (kE1 * k1[i] + kE3 * k3[i] + kE4 * k4[i] +
                                     kE5 * k5[i] + kE6 * k6[i]);
        const double scale =
            cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y_next[i]));
        const double r = std::abs(diff) / scale;
        err_sq += r * r;
      }
      const double err = std::sqrt(err_sq / static_cast<double>(n));
      if (!std::isfinite(err)) fail("non-finite amplitude during integration", z);

      if (err <= 1.0) {
        ++out.stats.accepted;
        z = clipped ? target : z + step;
        y.swap(y_next);
        if (clipped) {
          at_target = true;
        } else {
          const double grow = (err == 0.0) ? 5.0 : cfg.safety * std::pow(err, -0.2);
          h = std::min(cfg.hmax, step * std::clamp(grow, 0.2, 5.0));
        }
      } else {
        ++out.stats.rejected;
        const double shrink = std::clamp(cfg.safety * std::pow(err, -0.2), 0.1, 0.9);
        h = step * shrink;
        if (h < 1e-14 * std::max(1.0, std::abs(z)))
          fail("step size underflow: the error tolerance cannot be met", z);
      }
    }
    out.states.push_back(LatticeState{target, y});
  }
  return out;
}

EdgeReport edge_monitor(const Trajectory& traj, double threshold) {
  EdgeReport rep;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& a = traj.states[i].amplitudes;
    if (a.size() < 2) continue;
    double peak = 0.0;
    for (const Complex& v : a) peak = std::max(peak, std::norm(v));
    const double edge = std::norm(a[a.size() - 1]) + std::norm(a[a.size() - 2]);
    const double ratio = peak > 0.0 ? edge / peak : 0.0;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_sample = i;
    }
  }
  rep.flagged = rep.worst_ratio > threshold;
  return rep;
}

}  // namespace zigzag
