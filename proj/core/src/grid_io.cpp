#include "zigzag/grid.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace zigzag {

namespace {

void require_finite(double v) {
  if (!std::isfinite(v))
    throw std::runtime_error("refusing to export non-finite value");
}

void check_shape(const PropagationGrid& g) {
  if (g.m_hi < g.m_lo) throw std::invalid_argument("empty site range");
  if (g.cells.size() != g.z.size() * static_cast<std::size_t>(g.site_count()))
    throw std::invalid_argument("grid cell array does not match its shape");
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void commit(const std::filesystem::path& tmp, const std::filesystem::path& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move temporary file onto " + path.string());
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 40> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (res.ec != std::errc())
    throw std::runtime_error("double formatting failed");
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw std::runtime_error("malformed number '" + s + "'");
  return v;
}

PropagationGrid PropagationGrid::make(std::vector<double> z_grid, int lo, int hi) {
  if (hi < lo || lo < 0) throw std::invalid_argument("bad site range");
  PropagationGrid g;
  g.z = std::move(z_grid);
  g.m_lo = lo;
  g.m_hi = hi;
  g.cells.assign(g.z.size() * static_cast<std::size_t>(g.site_count()), GridCell{});
  return g;
}

bool PropagationGrid::any_flag() const {
  for (const GridCell& c : cells)
    if (c.flag) return true;
  return false;
}

CompareReport compare_grids(const PropagationGrid& a, const PropagationGrid& b,
                            double threshold) {
  check_shape(a);
  check_shape(b);
  if (a.z != b.z || a.m_lo != b.m_lo || a.m_hi != b.m_hi)
    throw std::invalid_argument("grids are not comparable: z grid or site range differ");

  CompareReport rep;
  rep.threshold = threshold;
  rep.per_z_max.assign(a.z.size(), 0.0);
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  for (std::size_t iz = 0; iz < a.z.size(); ++iz) {
    for (int m = a.m_lo; m <= a.m_hi; ++m) {
      const double ia = a.at(iz, m).intensity;
      const double ib = b.at(iz, m).intensity;
      const double d = std::abs(ia - ib);
      diff_sq += d * d;
      ref_sq += ia * ia;
      rep.per_z_max[iz] = std::max(rep.per_z_max[iz], d);
      if (d > rep.max_abs_error) {
        rep.max_abs_error = d;
        rep.worst_z = a.z[iz];
        rep.worst_m = m;
      }
    }
  }
  rep.rel_l2_error = ref_sq > 0.0 ? std::sqrt(diff_sq) / std::sqrt(ref_sq)
                                  : (diff_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.pass = rep.rel_l2_error < threshold;
  return rep;
}

GridFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? GridFormat::json : GridFormat::csv;
}

namespace {

void write_csv(const PropagationGrid& grid, std::ostream& out) {
  for (const auto& [key, value] : grid.meta) {
    if (key.find('\n') != std::string::npos || key.find('=') != std::string::npos ||
        value.find('\n') != std::string::npos)
      throw std::runtime_error("meta entry not representable in csv: " + key);
    out << "# " << key << "=" << value << "\n";
  }
  out << "Z,m,re,im,intensity,flag\n";
  for (std::size_t iz = 0; iz < grid.z.size(); ++iz) {
    const std::string zs = format_double(grid.z[iz]);
    for (int m = grid.m_lo; m <= grid.m_hi; ++m) {
      const GridCell& c = grid.at(iz, m);
      require_finite(c.re);
      require_finite(c.im);
      require_finite(c.intensity);
      out << zs << ',' << m << ',' << format_double(c.re) << ','
          << format_double(c.im) << ',' << format_double(c.intensity) << ','
          << (c.flag ? 1 : 0) << "\n";
    }
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

PropagationGrid read_csv(std::istream& in, const std::string& name) {
  std::map<std::string, std::string> meta;
  std::string line;
  bool have_header = false;
  struct Row {
    double z;
    int m;
    GridCell cell;
  };
  std::vector<Row> rows;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!have_header) {
      if (line != "Z,m,re,im,intensity,flag")
        throw std::runtime_error(name + ": unexpected csv header '" + line + "'");
      have_header = true;
      continue;
    }
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 6)
      throw std::runtime_error(name + ": line " + std::to_string(line_no) +
                               ": expected 6 fields");
    Row r;
    r.z = parse_double(fields[0]);
    r.m = static_cast<int>(std::stol(fields[1]));
    r.cell.re = parse_double(fields[2]);
    r.cell.im = parse_double(fields[3]);
    r.cell.intensity = parse_double(fields[4]);
    r.cell.flag = fields[5] == "1";
    rows.push_back(r);
  }
  if (!have_header) throw std::runtime_error(name + ": missing csv header");
  if (rows.empty()) throw std::runtime_error(name + ": no cells");

  int m_lo = rows.front().m;
  int m_hi = m_lo;
  for (const Row& r : rows) {
    m_lo = std::min(m_lo, r.m);
    m_hi = std::max(m_hi, r.m);
  }
  std::vector<double> z_grid;
  for (const Row& r : rows)
    if (z_grid.empty() || z_grid.back() != r.z) z_grid.push_back(r.z);

  PropagationGrid grid = PropagationGrid::make(std::move(z_grid), m_lo, m_hi);
  grid.meta = std::move(meta);
  if (rows.size() != grid.cells.size())
    throw std::runtime_error(name + ": cell rows do not fill the (Z, m) rectangle");
  std::size_t idx = 0;
  for (std::size_t iz = 0; iz < grid.z.size(); ++iz) {
    for (int m = grid.m_lo; m <= grid.m_hi; ++m, ++idx) {
      if (rows[idx].z != grid.z[iz] || rows[idx].m != m)
        throw std::runtime_error(name + ": rows are not Z-major / m-ascending");
      grid.at(iz, m) = rows[idx].cell;
    }
  }
  return grid;
}

void write_json(const PropagationGrid& grid, std::ostream& out) {
  nlohmann::json j;
  j["meta"] = grid.meta;
  j["z"] = grid.z;
  std::vector<int> sites;
  for (int m = grid.m_lo; m <= grid.m_hi; ++m) sites.push_back(m);
  j["m"] = sites;
  nlohmann::json cells = nlohmann::json::array();
  for (std::size_t iz = 0; iz < grid.z.size(); ++iz) {
    for (int m = grid.m_lo; m <= grid.m_hi; ++m) {
      const GridCell& c = grid.at(iz, m);
      require_finite(c.re);
      require_finite(c.im);
      require_finite(c.intensity);
      cells.push_back({c.re, c.im, c.intensity, c.flag ? 1 : 0});
    }
  }
  j["cells"] = std::move(cells);
  out << j.dump() << "\n";
}

PropagationGrid read_json(std::istream& in, const std::string& name) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
  if (!j.contains("z") || !j.contains("m") || !j.contains("cells"))
    throw std::runtime_error(name + ": missing z/m/cells");
  std::vector<double> z_grid = j["z"].get<std::vector<double>>();
  std::vector<int> sites = j["m"].get<std::vector<int>>();
  if (sites.empty()) throw std::runtime_error(name + ": empty site list");
  for (std::size_t i = 1; i < sites.size(); ++i)
    if (sites[i] != sites[i - 1] + 1)
      throw std::runtime_error(name + ": site list must be contiguous");

  PropagationGrid grid =
      PropagationGrid::make(std::move(z_grid), sites.front(), sites.back());
  if (j.contains("meta"))
    grid.meta = j["meta"].get<std::map<std::string, std::string>>();
  const nlohmann::json& cells = j["cells"];
  if (cells.size() != grid.cells.size())
    throw std::runtime_error(name + ": cell count does not match the shape");
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const nlohmann::json& c = cells[i];
    if (!c.is_array() || c.size() != 4)
      throw std::runtime_error(name + ": each cell must be [re, im, intensity, flag]");
    grid.cells[i].re = c[0].get<double>();
    grid.cells[i].im = c[1].get<double>();
    grid.cells[i].intensity = c[2].get<double>();
    grid.cells[i].flag = c[3].get<int>() != 0;
  }
  return grid;
}

}  // namespace

void write_text_atomic(const std::string& content, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_for_write(tmp);
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  commit(tmp, path);
}

void write_grid(const PropagationGrid& grid, const std::filesystem::path& path,
                GridFormat format) {
  check_shape(grid);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out = open_for_write(tmp);
    if (format == GridFormat::csv)
      write_csv(grid, out);
    else
      write_json(grid, out);
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  commit(tmp, path);
}

PropagationGrid read_grid(const std::filesystem::path& path, GridFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return format == GridFormat::csv ? read_csv(in, path.string())
                                   : read_json(in, path.string());
}

PropagationGrid read_grid(const std::filesystem::path& path) {
  return read_grid(path, format_from_path(path));
}

}  // namespace zigzag
