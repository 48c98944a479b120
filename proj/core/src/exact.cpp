#include "zigzag/exact.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "zigzag/special.hpp"

namespace zigzag {

namespace {

constexpr double kPi = std::numbers::pi;

void run_parallel(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body) {
  const int workers =
      std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      std::size_t i;
      while (!failed.load(std::memory_order_relaxed) &&
             (i = next.fetch_add(1)) < count) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

SolverContext make_context(const DimensionlessParams& params) {
  params.validate();
  SolverContext ctx;
  ctx.params = params;
  const double l = params.lambda;
  const double ap = params.alpha_plus;
  const double am = params.alpha_minus;
  const double b = params.beta;
  ctx.gamma_sq = 4.0 * b * b - l * l;
  if (std::abs(ctx.gamma_sq) <= kGammaSqEpsilon)
    throw std::domain_error(
        "degenerate parameters: |4 beta^2 - lambda^2| is too small for the "
        "closed-form solver");
  ctx.gamma = std::sqrt(Complex(ctx.gamma_sq, 0.0));
  ctx.zeta_minus = (2.0 * b * ap - l * am) / ctx.gamma_sq;
  ctx.zeta_plus = (2.0 * b * am - l * ap) / ctx.gamma_sq;
  // denominator-cleared form of f, finite when either alpha vanishes
  ctx.f_const = 0.5 * l - (ap * am * l - b * (am * am + ap * ap)) / ctx.gamma_sq;
  return ctx;
}

ZFactors z_factors(double z, const SolverContext& ctx) {
  const double l = ctx.params.lambda;
  const double ap = ctx.params.alpha_plus;
  const double am = ctx.params.alpha_minus;
  const double b = ctx.params.beta;

  const Complex gz = ctx.gamma * z;
  const Complex sh = std::sinh(gz);
  const Complex ch = std::cosh(gz);
  const Complex sh_half = std::sinh(0.5 * gz);
  const Complex sh2 = sh_half * sh_half;
  const Complex sh_over_g = sh / ctx.gamma;  // even in Gamma
  const Complex gamma_sh = ctx.gamma * sh;   // even in Gamma
  const Complex i_unit(0.0, 1.0);

  ZFactors zf;
  zf.z = z;
  // denominator-cleared coefficients, finite when either alpha vanishes
  zf.xi_plus =
      (2.0 * (l * am - 2.0 * b * ap) * sh2 + i_unit * am * gamma_sh) / ctx.gamma_sq;
  zf.xi_minus =
      (2.0 * (l * ap - 2.0 * b * am) * sh2 - i_unit * ap * gamma_sh) / ctx.gamma_sq;

  const double zp = ctx.zeta_plus;
  const double zm = ctx.zeta_minus;
  zf.nu = ctx.f_const * z - (l * zp * zm + b * (zm * zm + zp * zp)) * sh_over_g;

  const Complex w = ch - i_unit * l * sh_over_g;
  zf.g0 = -2.0 * std::log(w);
  if (ctx.gamma_sq < 0.0) {
    // Unwrap the log so exp(g0/4) follows the evolution continuously:
    // w crosses the negative real axis at |Gamma| Z = pi (mod 2 pi).
    const double omega = std::sqrt(-ctx.gamma_sq);
    const double crossings = std::floor((omega * z + kPi) / (2.0 * kPi));
    if (crossings != 0.0)
      zf.g0 += Complex(0.0, 4.0 * kPi * crossings * (l > 0.0 ? 1.0 : -1.0));
  }
  zf.g1 = 2.0 * i_unit * b * sh_over_g / (ch - i_unit * l * sh_over_g);
  return zf;
}

Complex d_element(int k, int n, const ZFactors& zf) {
  if (k < 0 || n < 0) throw std::invalid_argument("lattice indices must be >= 0");
  const Complex x = zf.xi_plus * zf.xi_minus;
  const int degree = std::min(k, n);
  const int order = std::abs(k - n);
  const Complex base = (k >= n) ? zf.xi_plus : -zf.xi_minus;
  if (order > 0 && base == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
  const Complex lag = laguerre(degree, order, x);
  if (lag == Complex(0.0, 0.0)) return Complex(0.0, 0.0);

  double logmag = -0.5 * x.real() +
                  0.5 * (log_factorial(degree) - log_factorial(std::max(k, n))) +
                  std::log(std::abs(lag));
  double phase = -0.5 * x.imag() + std::arg(lag);
  if (order > 0) {
    logmag += order * std::log(std::abs(base));
    phase += order * std::arg(base);
  }
  return std::polar(std::exp(logmag), phase);
}

Complex s_element(int m, int k, const ZFactors& zf) {
  if (m < 0 || k < 0) throw std::invalid_argument("lattice indices must be >= 0");
  if ((m + k) % 2 != 0) return Complex(0.0, 0.0);

  const double lg_prefix = 0.5 * (log_factorial(m) + log_factorial(k));
  const Complex g1_half = 0.5 * zf.g1;
  const bool g1_zero = (g1_half == Complex(0.0, 0.0));
  const double g1_logmag = g1_zero ? 0.0 : std::log(std::abs(g1_half));
  const double g1_arg = g1_zero ? 0.0 : std::arg(g1_half);

  Complex sum(0.0, 0.0);
  const int p_hi = std::min(m, k);
  for (int p = m % 2; p <= p_hi; p += 2) {
    const int power = (m + k) / 2 - p;  // exponent of g1/2 after combining
    if (power > 0 && g1_zero) continue;
    double logmag = lg_prefix + 0.25 * zf.g0.real() + 0.5 * p * zf.g0.real() -
                    log_factorial((m - p) / 2) - log_factorial((k - p) / 2) -
                    log_factorial(p);
    double phase = 0.25 * zf.g0.imag() + 0.5 * p * zf.g0.imag();
    if (power > 0) {
      logmag += power * g1_logmag;
      phase += power * g1_arg;
    }
    sum += std::polar(std::exp(logmag), phase);
  }
  return sum;
}

void TruncationPolicy::validate(int input_site) const {
  if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be > 0");
  if (consecutive_below < 1)
    throw std::invalid_argument("consecutive_below must be >= 1");
  if (k_max < input_site + 20)
    throw std::invalid_argument("k_max must be >= input_site + 20");
}

ColumnEvaluator::ColumnEvaluator(const ZFactors& zf, int input_site,
                                 const TruncationPolicy& pol)
    : zf_(zf), input_site_(input_site), pol_(pol) {
  if (input_site < 0) throw std::invalid_argument("input site must be >= 0");
  pol.validate(input_site);
  global_phase_ = std::exp(Complex(0.0, -1.0) * zf.nu);
}

Complex ColumnEvaluator::displacement(int k) {
  const std::size_t idx = static_cast<std::size_t>(k);
  while (d_cache_.size() <= idx)
    d_cache_.push_back(d_element(static_cast<int>(d_cache_.size()), input_site_, zf_));
  return d_cache_[idx];
}

Amplitude ColumnEvaluator::at(int site) {
  if (site < 0) throw std::invalid_argument("site must be >= 0");
  Complex sum(0.0, 0.0);
  int below = 0;
  bool converged = false;
  // terms can grow before they decay; start tail counting past the bigger index
  const int settle = std::max(site, input_site_);
  for (int k = site % 2; k <= pol_.k_max; k += 2) {
    const Complex term = s_element(site, k, zf_) * displacement(k);
    sum += term;
    if (k > settle) {
      if (std::abs(term) < pol_.tail_tol * std::max(1.0, std::abs(sum))) {
        if (++below >= pol_.consecutive_below) {
          converged = true;
          break;
        }
      } else {
        below = 0;
      }
    }
  }
  return Amplitude{global_phase_ * sum, !converged};
}

Amplitude amplitude(int input_site, int site, double z, const SolverContext& ctx,
                    const TruncationPolicy& pol) {
  ColumnEvaluator column(z_factors(z, ctx), input_site, pol);
  return column.at(site);
}

PropagatedState propagate(std::span<const Complex> initial, double z,
                          const SolverContext& ctx, const TruncationPolicy& pol,
                          int site_count) {
  if (site_count < 0) site_count = static_cast<int>(initial.size());
  PropagatedState out;
  out.state.z = z;
  out.state.amplitudes.assign(static_cast<std::size_t>(site_count), Complex(0.0, 0.0));
  const ZFactors zf = z_factors(z, ctx);
  for (std::size_t n = 0; n < initial.size(); ++n) {
    if (initial[n] == Complex(0.0, 0.0)) continue;
    ColumnEvaluator column(zf, static_cast<int>(n), pol);
    for (int m = 0; m < site_count; ++m) {
      const Amplitude a = column.at(m);
      out.state.amplitudes[static_cast<std::size_t>(m)] += initial[n] * a.value;
      out.truncated = out.truncated || a.truncated;
    }
  }
  return out;
}

PropagationGrid intensity_map(int input_site, std::span<const double> z_grid,
                              int m_lo, int m_hi, const SolverContext& ctx,
                              const TruncationPolicy& pol, int threads) {
  if (m_lo < 0 || m_hi < m_lo)
    throw std::invalid_argument("site range must satisfy 0 <= m_lo <= m_hi");
  if (z_grid.empty()) throw std::invalid_argument("empty z grid");
  pol.validate(input_site);

  PropagationGrid grid =
      PropagationGrid::make(std::vector<double>(z_grid.begin(), z_grid.end()), m_lo, m_hi);
  run_parallel(z_grid.size(), threads, [&](std::size_t iz) {
    ColumnEvaluator column(z_factors(z_grid[iz], ctx), input_site, pol);
    for (int m = m_lo; m <= m_hi; ++m) {
      const Amplitude a = column.at(m);
      GridCell& cell = grid.at(iz, m);
      cell.re = a.value.real();
      cell.im = a.value.imag();
      cell.intensity = cell.re * cell.re + cell.im * cell.im;
      cell.flag = a.truncated;
    }
  });
  return grid;
}

XiCurves xi_curves(std::span<const double> z_grid, const SolverContext& ctx) {
  XiCurves out;
  out.z.assign(z_grid.begin(), z_grid.end());
  out.re_plus.reserve(z_grid.size());
  out.im_plus.reserve(z_grid.size());
  out.re_minus.reserve(z_grid.size());
  out.im_minus.reserve(z_grid.size());
  for (double z : z_grid) {
    const ZFactors zf = z_factors(z, ctx);
    out.re_plus.push_back(zf.xi_plus.real());
    out.im_plus.push_back(zf.xi_plus.imag());
    out.re_minus.push_back(zf.xi_minus.real());
    out.im_minus.push_back(zf.xi_minus.imag());
  }
  return out;
}

}  // namespace zigzag
