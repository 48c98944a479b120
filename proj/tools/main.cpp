// zigzag: simulate light propagation in a non-Hermitian zigzag Glauber-Fock
// waveguide lattice, by adaptive integration of the coupled-mode equations
// and by the closed-form propagator, and cross-validate the two.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "zigzag/exact.hpp"
#include "zigzag/grid.hpp"
#include "zigzag/integrator.hpp"
#include "zigzag/lattice.hpp"
#include "zigzag/su11.hpp"
#include "zigzag/version.hpp"

namespace {

using nlohmann::json;
using namespace zigzag;

// exit codes
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;
constexpr int kThresholdExceeded = 4;
constexpr int kTruncationFlagged = 5;

struct RunConfig {
  // dimensionless parameters
  std::optional<double> lambda, alpha_plus, alpha_minus, beta;
  // physical parameters (converted via nondimensionalize when given)
  std::optional<double> coupling, alpha0, mu, d1, d2, kappa;
  std::string alpha0_unit = "per_cm";
  // lattice and sampling
  int input_site = 0;
  int sites = 60;
  std::optional<double> zmax;
  int z_samples = 101;
  std::optional<int> m_max;
  std::string method = "both";
  // integrator
  double rtol = 1e-10, atol = 1e-12, h0 = 1e-3, hmax = 0.5, safety = 0.9;
  double edge_threshold = 1e-8;
  // closed-form truncation
  double tail_tol = 1e-14;
  int consecutive_below = 4;
  int k_max = 400;
  // output and comparison
  double threshold = 1e-5;
  std::optional<std::string> output;
  std::optional<std::string> format;
  bool allow_flags = false;
};

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument(msg);
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) config_error("config key '" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    config_error("config key '" + key + "' must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) config_error("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  }
  if (!j.is_object()) config_error(path + ": config must be a flat JSON object");

  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "lambda") cfg.lambda = as_double(value, key);
    else if (key == "alpha_plus") cfg.alpha_plus = as_double(value, key);
    else if (key == "alpha_minus") cfg.alpha_minus = as_double(value, key);
    else if (key == "beta") cfg.beta = as_double(value, key);
    else if (key == "C") cfg.coupling = as_double(value, key);
    else if (key == "alpha0") cfg.alpha0 = as_double(value, key);
    else if (key == "alpha0_unit") cfg.alpha0_unit = as_string(value, key);
    else if (key == "mu") cfg.mu = as_double(value, key);
    else if (key == "d1") cfg.d1 = as_double(value, key);
    else if (key == "d2") cfg.d2 = as_double(value, key);
    else if (key == "kappa") cfg.kappa = as_double(value, key);
    else if (key == "input_site") cfg.input_site = as_int(value, key);
    else if (key == "sites") cfg.sites = as_int(value, key);
    else if (key == "zmax") cfg.zmax = as_double(value, key);
    else if (key == "z_samples") cfg.z_samples = as_int(value, key);
    else if (key == "m_max") cfg.m_max = as_int(value, key);
    else if (key == "method") cfg.method = as_string(value, key);
    else if (key == "rtol") cfg.rtol = as_double(value, key);
    else if (key == "atol") cfg.atol = as_double(value, key);
    else if (key == "h0") cfg.h0 = as_double(value, key);
    else if (key == "hmax") cfg.hmax = as_double(value, key);
    else if (key == "safety") cfg.safety = as_double(value, key);
    else if (key == "edge_threshold") cfg.edge_threshold = as_double(value, key);
    else if (key == "tail_tol") cfg.tail_tol = as_double(value, key);
    else if (key == "consecutive_below") cfg.consecutive_below = as_int(value, key);
    else if (key == "k_max") cfg.k_max = as_int(value, key);
    else if (key == "threshold") cfg.threshold = as_double(value, key);
    else if (key == "output") cfg.output = as_string(value, key);
    else if (key == "format") cfg.format = as_string(value, key);
    else if (key == "allow_flags") cfg.allow_flags = as_bool(value, key);
    else config_error(path + ": unknown config key '" + key + "'");
  }
  if (cfg.alpha0_unit != "per_cm" && cfg.alpha0_unit != "per_mm")
    config_error(path + ": key 'alpha0_unit' must be per_cm or per_mm");
  if (cfg.format && *cfg.format != "csv" && *cfg.format != "json")
    config_error(path + ": key 'format' must be csv or json");
  return cfg;
}

// One CLI option per config key; flags given on the command line override
// values from --config.
void add_config_options(CLI::App* cmd, RunConfig* cli) {
  auto opt_double = [cmd](const char* name, std::optional<double>& slot,
                          const char* help) {
    cmd->add_option(
        name,
        [&slot](const CLI::results_t& r) {
          slot = std::stod(r[0]);
          return true;
        },
        help);
  };
  opt_double("--lambda", cli->lambda, "dimensionless on-site gradient");
  opt_double("--alpha-plus", cli->alpha_plus, "forward hopping amplitude");
  opt_double("--alpha-minus", cli->alpha_minus, "backward hopping amplitude");
  opt_double("--beta", cli->beta, "second-neighbour hopping amplitude");
  opt_double("--C", cli->coupling, "reference coupling C (1/cm)");
  opt_double("--alpha0", cli->alpha0, "index gradient alpha0 (see --alpha0-unit)");
  cmd->add_option("--alpha0-unit", cli->alpha0_unit, "per_cm or per_mm")
      ->check(CLI::IsMember({"per_cm", "per_mm"}));
  opt_double("--mu", cli->mu, "base propagation constant (1/cm); global phase only");
  opt_double("--d1", cli->d1, "first-neighbour reference distance (um)");
  opt_double("--d2", cli->d2, "second-neighbour reference distance (um)");
  opt_double("--kappa", cli->kappa, "evanescent decay length (um)");
  cmd->add_option("--input-site", cli->input_site, "excited waveguide n");
  cmd->add_option("--sites", cli->sites, "lattice truncation N");
  opt_double("--zmax", cli->zmax, "propagation range [0, zmax]");
  cmd->add_option("--z-samples", cli->z_samples, "number of Z samples");
  cmd->add_option(
      "--m-max",
      [cli](const CLI::results_t& r) {
        cli->m_max = std::stoi(r[0]);
        return true;
      },
      "largest exported site (default sites-1)");
  cmd->add_option("--method", cli->method, "numeric, exact or both")
      ->check(CLI::IsMember({"numeric", "exact", "both"}));
  cmd->add_option("--rtol", cli->rtol, "integrator relative tolerance");
  cmd->add_option("--atol", cli->atol, "integrator absolute tolerance");
  cmd->add_option("--h0", cli->h0, "initial step size");
  cmd->add_option("--hmax", cli->hmax, "maximum step size");
  cmd->add_option("--safety", cli->safety, "step controller safety factor");
  cmd->add_option("--edge-threshold", cli->edge_threshold,
                  "truncation monitor threshold");
  cmd->add_option("--tail-tol", cli->tail_tol, "k-sum tail tolerance");
  cmd->add_option("--consecutive-below", cli->consecutive_below,
                  "tail terms below tolerance before stopping");
  cmd->add_option("--k-max", cli->k_max, "k-sum hard cap");
  cmd->add_option("--threshold", cli->threshold,
                  "rel L2 comparison threshold for method=both");
  cmd->add_option(
      "--output",
      [cli](const CLI::results_t& r) {
        cli->output = r[0];
        return true;
      },
      "output path");
  cmd->add_option(
         "--format",
         [cli](const CLI::results_t& r) {
           cli->format = r[0];
           return true;
         },
         "csv or json (default: by extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--allow-flags", cli->allow_flags,
                "exit 0 even when truncation was flagged");
}

RunConfig merge_file_and_flags(const CLI::App& cmd,
                               const std::optional<std::string>& config_path,
                               const RunConfig& cli) {
  if (!config_path) return cli;
  RunConfig out = load_config_file(*config_path);
  // optional fields carry their own presence
  if (cli.lambda) out.lambda = cli.lambda;
  if (cli.alpha_plus) out.alpha_plus = cli.alpha_plus;
  if (cli.alpha_minus) out.alpha_minus = cli.alpha_minus;
  if (cli.beta) out.beta = cli.beta;
  if (cli.coupling) out.coupling = cli.coupling;
  if (cli.alpha0) out.alpha0 = cli.alpha0;
  if (cli.mu) out.mu = cli.mu;
  if (cli.d1) out.d1 = cli.d1;
  if (cli.d2) out.d2 = cli.d2;
  if (cli.kappa) out.kappa = cli.kappa;
  if (cli.zmax) out.zmax = cli.zmax;
  if (cli.m_max) out.m_max = cli.m_max;
  if (cli.format) out.format = cli.format;
  if (cli.output) out.output = cli.output;
  // plain fields: adopt exactly those given on the command line
  auto given = [&cmd](const char* name) { return cmd.count(name) > 0; };
  if (given("--alpha0-unit")) out.alpha0_unit = cli.alpha0_unit;
  if (given("--input-site")) out.input_site = cli.input_site;
  if (given("--sites")) out.sites = cli.sites;
  if (given("--z-samples")) out.z_samples = cli.z_samples;
  if (given("--method")) out.method = cli.method;
  if (given("--rtol")) out.rtol = cli.rtol;
  if (given("--atol")) out.atol = cli.atol;
  if (given("--h0")) out.h0 = cli.h0;
  if (given("--hmax")) out.hmax = cli.hmax;
  if (given("--safety")) out.safety = cli.safety;
  if (given("--edge-threshold")) out.edge_threshold = cli.edge_threshold;
  if (given("--tail-tol")) out.tail_tol = cli.tail_tol;
  if (given("--consecutive-below")) out.consecutive_below = cli.consecutive_below;
  if (given("--k-max")) out.k_max = cli.k_max;
  if (given("--threshold")) out.threshold = cli.threshold;
  if (given("--allow-flags")) out.allow_flags = cli.allow_flags;
  return out;
}

bool has_physical(const RunConfig& cfg) {
  return cfg.coupling || cfg.alpha0 || cfg.mu || cfg.d1 || cfg.d2 || cfg.kappa;
}

DimensionlessParams resolve_params(const RunConfig& cfg) {
  if (cfg.lambda && has_physical(cfg))
    config_error(
        "give either dimensionless parameters (--lambda / key 'lambda') or "
        "physical ones (--C, --alpha0), not both");
  if (cfg.lambda) {
    DimensionlessParams p;
    p.lambda = *cfg.lambda;
    p.alpha_plus = cfg.alpha_plus.value_or(0.0);
    p.alpha_minus = cfg.alpha_minus.value_or(0.0);
    p.beta = cfg.beta.value_or(0.0);
    p.validate();
    return p;
  }
  if (cfg.coupling && cfg.alpha0) {
    PhysicalParams p;
    p.coupling = *cfg.coupling;
    const RateUnit unit =
        cfg.alpha0_unit == "per_mm" ? RateUnit::per_mm : RateUnit::per_cm;
    p.gradient = rate_per_cm(*cfg.alpha0, unit);
    p.mu = cfg.mu.value_or(0.0);
    p.d1 = cfg.d1.value_or(0.0);
    p.d2 = cfg.d2.value_or(0.0);
    p.kappa = cfg.kappa.value_or(1.0);
    p.alpha_plus = cfg.alpha_plus.value_or(0.0);
    p.alpha_minus = cfg.alpha_minus.value_or(0.0);
    p.beta = cfg.beta.value_or(0.0);
    return nondimensionalize(p).params;
  }
  config_error(
      "missing required parameter keys: provide 'lambda' (--lambda) or both 'C' "
      "(--C) and 'alpha0' (--alpha0)");
}

void validate_simulate(const RunConfig& cfg) {
  std::string missing;
  if (!cfg.lambda && !(cfg.coupling && cfg.alpha0))
    missing += "'lambda' (--lambda) or 'C' plus 'alpha0' (--C, --alpha0)";
  if (!cfg.zmax) {
    if (!missing.empty()) missing += ", ";
    missing += "'zmax' (--zmax)";
  }
  if (!missing.empty()) config_error("missing required keys: " + missing);
  if (!(*cfg.zmax > 0.0)) config_error("'zmax' (--zmax) must be > 0");
  if (cfg.z_samples < 2) config_error("'z_samples' (--z-samples) must be >= 2");
  if (cfg.sites < 5) config_error("'sites' (--sites) must be >= 5");
  if (cfg.input_site < 0 || cfg.input_site >= cfg.sites)
    config_error("'input_site' (--input-site) must satisfy 0 <= n < sites");
  if (cfg.m_max && *cfg.m_max < 0) config_error("'m_max' (--m-max) must be >= 0");
  if (cfg.method != "exact" && cfg.m_max && *cfg.m_max >= cfg.sites)
    config_error("'m_max' (--m-max) must be < sites for numeric runs");
  if (!(cfg.threshold > 0.0)) config_error("'threshold' (--threshold) must be > 0");
  if (!(cfg.edge_threshold > 0.0))
    config_error("'edge_threshold' (--edge-threshold) must be > 0");
}

std::vector<double> make_z_grid(double zmax, int samples) {
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i)
    out[static_cast<std::size_t>(i)] =
        zmax * static_cast<double>(i) / static_cast<double>(samples - 1);
  out.front() = 0.0;
  return out;
}

int thread_count() {
  if (const char* env = std::getenv("ZIGZAG_THREADS")) {
    const std::string value(env);
    std::size_t pos = 0;
    int n = 0;
    try {
      n = std::stoi(value, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != value.size() || n < 1)
      config_error("ZIGZAG_THREADS must be a positive integer");
    return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

json effective_config_json(const RunConfig& cfg) {
  json j;
  if (cfg.lambda) j["lambda"] = *cfg.lambda;
  if (cfg.alpha_plus) j["alpha_plus"] = *cfg.alpha_plus;
  if (cfg.alpha_minus) j["alpha_minus"] = *cfg.alpha_minus;
  if (cfg.beta) j["beta"] = *cfg.beta;
  if (cfg.coupling) j["C"] = *cfg.coupling;
  if (cfg.alpha0) {
    j["alpha0"] = *cfg.alpha0;
    j["alpha0_unit"] = cfg.alpha0_unit;
  }
  if (cfg.mu) j["mu"] = *cfg.mu;
  if (cfg.d1) j["d1"] = *cfg.d1;
  if (cfg.d2) j["d2"] = *cfg.d2;
  if (cfg.kappa) j["kappa"] = *cfg.kappa;
  j["input_site"] = cfg.input_site;
  j["sites"] = cfg.sites;
  if (cfg.zmax) j["zmax"] = *cfg.zmax;
  j["z_samples"] = cfg.z_samples;
  if (cfg.m_max) j["m_max"] = *cfg.m_max;
  j["method"] = cfg.method;
  j["rtol"] = cfg.rtol;
  j["atol"] = cfg.atol;
  j["tail_tol"] = cfg.tail_tol;
  j["consecutive_below"] = cfg.consecutive_below;
  j["k_max"] = cfg.k_max;
  j["edge_threshold"] = cfg.edge_threshold;
  return j;
}

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const std::string& tag) {
  std::filesystem::path p = base;
  const std::string ext = p.extension().string();
  p.replace_extension();
  p += "-" + tag + ext;
  return p;
}

void print_report(const CompareReport& rep) {
  std::cout << "comparison (intensities, grid A vs grid B)\n"
            << "  max abs error : " << format_double(rep.max_abs_error) << " at (Z="
            << format_double(rep.worst_z) << ", m=" << rep.worst_m << ")\n"
            << "  rel L2 error  : " << format_double(rep.rel_l2_error) << "\n"
            << "  threshold     : " << format_double(rep.threshold) << "  -> "
            << (rep.pass ? "PASS" : "FAIL") << "\n";
}

int run_simulate(const RunConfig& cfg) {
  validate_simulate(cfg);
  const DimensionlessParams params = resolve_params(cfg);
  const int m_hi = cfg.m_max.value_or(cfg.sites - 1);
  const std::vector<double> z_grid = make_z_grid(*cfg.zmax, cfg.z_samples);
  const std::string output = cfg.output.value_or("grid.csv");
  const GridFormat format =
      cfg.format ? (*cfg.format == "json" ? GridFormat::json : GridFormat::csv)
                 : format_from_path(output);

  const bool want_exact = cfg.method == "exact" || cfg.method == "both";
  const bool want_numeric = cfg.method == "numeric" || cfg.method == "both";

  std::map<std::string, std::string> meta_base;
  meta_base["version"] = std::string(kVersion);
  meta_base["config"] = effective_config_json(cfg).dump();

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  bool flagged = false;
  std::optional<PropagationGrid> exact_grid, numeric_grid;

  if (want_exact) {
    const SolverContext ctx = make_context(params);
    TruncationPolicy pol;
    pol.tail_tol = cfg.tail_tol;
    pol.consecutive_below = cfg.consecutive_below;
    pol.k_max = cfg.k_max;
    PropagationGrid grid =
        intensity_map(cfg.input_site, z_grid, 0, m_hi, ctx, pol, thread_count());
    grid.meta = meta_base;
    grid.meta["method"] = "exact";
    grid.meta["wall_ms"] = std::to_string(elapsed_ms());
    const auto flags = std::count_if(grid.cells.begin(), grid.cells.end(),
                                     [](const GridCell& c) { return c.flag; });
    if (flags > 0) {
      flagged = true;
      std::cout << "exact: " << flags << " cell(s) carry a truncation flag (k_max="
                << cfg.k_max << ")\n";
    }
    exact_grid = std::move(grid);
  }

  if (want_numeric) {
    IntegratorConfig icfg;
    icfg.rtol = cfg.rtol;
    icfg.atol = cfg.atol;
    icfg.h0 = cfg.h0;
    icfg.hmax = cfg.hmax;
    icfg.safety = cfg.safety;
    icfg.z_grid = z_grid;
    const Trajectory traj =
        integrate(single_site_state(cfg.input_site, cfg.sites), params, icfg);

    PropagationGrid grid = PropagationGrid::make(z_grid, 0, m_hi);
    for (std::size_t iz = 0; iz < z_grid.size(); ++iz) {
      const auto& amps = traj.states[iz].amplitudes;
      double peak = 0.0;
      for (const Complex& v : amps) peak = std::max(peak, std::norm(v));
      const double edge =
          std::norm(amps[amps.size() - 1]) + std::norm(amps[amps.size() - 2]);
      const bool row_flag = peak > 0.0 && edge / peak > cfg.edge_threshold;
      for (int m = 0; m <= m_hi; ++m) {
        GridCell& cell = grid.at(iz, m);
        const Complex v = amps[static_cast<std::size_t>(m)];
        cell.re = v.real();
        cell.im = v.imag();
        cell.intensity = cell.re * cell.re + cell.im * cell.im;
        cell.flag = row_flag;
      }
    }
    const EdgeReport edge = edge_monitor(traj, cfg.edge_threshold);
    std::cout << "numeric: " << traj.stats.accepted << " accepted / "
              << traj.stats.rejected << " rejected steps, "
              << traj.stats.rhs_evaluations << " rhs evaluations\n";
    if (edge.flagged) {
      flagged = true;
      std::cout << "numeric: truncation monitor flagged (worst edge ratio "
                << format_double(edge.worst_ratio) << " at sample "
                << edge.worst_sample << "); consider raising --sites\n";
    }
    grid.meta = meta_base;
    grid.meta["method"] = "numeric";
    grid.meta["wall_ms"] = std::to_string(elapsed_ms());
    numeric_grid = std::move(grid);
  }

  std::optional<CompareReport> report;
  if (exact_grid && numeric_grid)
    report = compare_grids(*exact_grid, *numeric_grid, cfg.threshold);

  const std::filesystem::path out_path(output);
  if (exact_grid && numeric_grid) {
    write_grid(*exact_grid, with_suffix(out_path, "exact"), format);
    write_grid(*numeric_grid, with_suffix(out_path, "numeric"), format);
    std::cout << "wrote " << with_suffix(out_path, "exact").string() << " and "
              << with_suffix(out_path, "numeric").string() << "\n";
  } else if (exact_grid) {
    write_grid(*exact_grid, out_path, format);
    std::cout << "wrote " << out_path.string() << "\n";
  } else if (numeric_grid) {
    write_grid(*numeric_grid, out_path, format);
    std::cout << "wrote " << out_path.string() << "\n";
  }

  if (report) print_report(*report);
  std::cout << "done in " << elapsed_ms() << " ms\n";

  if (flagged && !cfg.allow_flags) return kTruncationFlagged;
  if (report && !report->pass) return kThresholdExceeded;
  return kOk;
}

int run_compare(const std::string& path_a, const std::string& path_b,
                double threshold) {
  const PropagationGrid a = read_grid(path_a);
  const PropagationGrid b = read_grid(path_b);
  const CompareReport rep = compare_grids(a, b, threshold);
  print_report(rep);
  return rep.pass ? kOk : kThresholdExceeded;
}

int run_period(double lambda, double beta) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << bloch_period(lambda, beta);
  std::cout << out.str() << "\n";
  return kOk;
}

int run_xi(const RunConfig& cfg) {
  if (!cfg.zmax) config_error("missing required key 'zmax' (--zmax)");
  if (!(*cfg.zmax > 0.0)) config_error("'zmax' (--zmax) must be > 0");
  if (cfg.z_samples < 2) config_error("'z_samples' (--z-samples) must be >= 2");
  const DimensionlessParams params = resolve_params(cfg);
  const SolverContext ctx = make_context(params);
  const std::vector<double> z_grid = make_z_grid(*cfg.zmax, cfg.z_samples);
  const XiCurves curves = xi_curves(z_grid, ctx);

  const std::string output = cfg.output.value_or("xi.csv");
  const GridFormat format =
      cfg.format ? (*cfg.format == "json" ? GridFormat::json : GridFormat::csv)
                 : format_from_path(output);
  std::string content;
  if (format == GridFormat::csv) {
    std::ostringstream out;
    out << "Z,re_xi_plus,im_xi_plus,re_xi_minus,im_xi_minus\n";
    for (std::size_t i = 0; i < curves.z.size(); ++i)
      out << format_double(curves.z[i]) << ',' << format_double(curves.re_plus[i])
          << ',' << format_double(curves.im_plus[i]) << ','
          << format_double(curves.re_minus[i]) << ','
          << format_double(curves.im_minus[i]) << "\n";
    content = out.str();
  } else {
    json j;
    j["meta"] = {{"version", std::string(kVersion)},
                 {"config", effective_config_json(cfg).dump()}};
    j["z"] = curves.z;
    j["re_xi_plus"] = curves.re_plus;
    j["im_xi_plus"] = curves.im_plus;
    j["re_xi_minus"] = curves.re_minus;
    j["im_xi_minus"] = curves.im_minus;
    content = j.dump() + "\n";
  }
  write_text_atomic(content, output);
  std::cout << "wrote " << output << "\n";
  return kOk;
}

Complex parse_complex(const std::string& text) {
  const std::size_t comma = text.find(',');
  try {
    if (comma == std::string::npos) return Complex(std::stod(text), 0.0);
    return Complex(std::stod(text.substr(0, comma)),
                   std::stod(text.substr(comma + 1)));
  } catch (const std::exception&) {
    config_error("cannot parse complex number '" + text + "' (expected RE or RE,IM)");
  }
}

std::string show_complex(Complex v) {
  return "(" + format_double(v.real()) + ", " + format_double(v.imag()) + ")";
}

int run_disentangle(const std::string& sp, const std::string& s0,
                    const std::string& sm) {
  const TripleCoefficients t{parse_complex(sp), parse_complex(s0), parse_complex(sm)};
  const FactoredForm ff = disentangle(t);
  const Mat2 lhs = su11_closed_form_2x2(t);
  const Mat2 rhs = factored_product_2x2(ff);
  double residual = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    residual = std::max(residual, std::abs(lhs[i] - rhs[i]));
  std::cout << "f = " << show_complex(ff.f) << "\n"
            << "g = " << show_complex(ff.g) << "\n"
            << "h = " << show_complex(ff.h) << "\n"
            << "round-trip residual = " << format_double(residual) << "\n";
  return kOk;
}

template <typename F>
int guarded(F&& run) {
  try {
    return run();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-Hermitian zigzag Glauber-Fock lattice propagation toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig sim_cli;
  std::optional<std::string> sim_config_path;
  CLI::App* sim = app.add_subcommand(
      "simulate", "propagate a single-site excitation and export the grid");
  sim->add_option(
      "--config",
      [&sim_config_path](const CLI::results_t& r) {
        sim_config_path = r[0];
        return true;
      },
      "flat JSON config file; flags override its keys");
  add_config_options(sim, &sim_cli);

  std::string cmp_a, cmp_b;
  double cmp_threshold = 1e-5;
  CLI::App* cmp = app.add_subcommand("compare", "compare two exported grids");
  cmp->add_option("grid_a", cmp_a, "first grid file")->required();
  cmp->add_option("grid_b", cmp_b, "second grid file")->required();
  cmp->add_option("--threshold", cmp_threshold, "rel L2 threshold");

  double period_lambda = 0.0, period_beta = 0.0;
  CLI::App* per = app.add_subcommand("period", "print the Bloch period");
  per->add_option("--lambda", period_lambda)->required();
  per->add_option("--beta", period_beta)->required();

  RunConfig xi_cli;
  std::optional<std::string> xi_config_path;
  CLI::App* xi = app.add_subcommand("xi", "export the xi+-(Z) curves");
  xi->add_option(
      "--config",
      [&xi_config_path](const CLI::results_t& r) {
        xi_config_path = r[0];
        return true;
      },
      "flat JSON config file; flags override its keys");
  add_config_options(xi, &xi_cli);

  std::string dis_plus, dis_zero, dis_minus;
  CLI::App* dis = app.add_subcommand(
      "disentangle", "normal-order exp(A+ K+ + A0 K0 + A- K-), print f, g, h");
  dis->add_option("--a-plus", dis_plus, "A+ as RE or RE,IM")->required();
  dis->add_option("--a0", dis_zero, "A0 as RE or RE,IM")->required();
  dis->add_option("--a-minus", dis_minus, "A- as RE or RE,IM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*sim)
    return guarded([&] {
      return run_simulate(merge_file_and_flags(*sim, sim_config_path, sim_cli));
    });
  if (*cmp) return guarded([&] { return run_compare(cmp_a, cmp_b, cmp_threshold); });
  if (*per) return guarded([&] { return run_period(period_lambda, period_beta); });
  if (*xi)
    return guarded(
        [&] { return run_xi(merge_file_and_flags(*xi, xi_config_path, xi_cli)); });
  if (*dis)
    return guarded([&] { return run_disentangle(dis_plus, dis_zero, dis_minus); });
  return kConfigError;
}
