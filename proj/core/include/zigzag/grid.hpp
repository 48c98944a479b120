#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace zigzag {

struct GridCell {
  double re = 0.0;
  double im = 0.0;
  double intensity = 0.0;  // re^2 + im^2
  bool flag = false;       // truncation warning
};

/// Intensity/amplitude samples over a (Z, site) rectangle; the unit of
/// file export. Cells are Z-major, sites ascending within a row.
struct PropagationGrid {
  std::vector<double> z;
  int m_lo = 0;
  int m_hi = -1;
  std::vector<GridCell> cells;
  std::map<std::string, std::string> meta;

  int site_count() const { return m_hi - m_lo + 1; }
  std::size_t cell_index(std::size_t iz, int m) const {
    return iz * static_cast<std::size_t>(site_count()) + (m - m_lo);
  }
  GridCell& at(std::size_t iz, int m) { return cells[cell_index(iz, m)]; }
  const GridCell& at(std::size_t iz, int m) const { return cells[cell_index(iz, m)]; }

  /// Allocates the cell array for the given shape.
  static PropagationGrid make(std::vector<double> z_grid, int m_lo, int m_hi);
  bool any_flag() const;
};

struct CompareReport {
  double max_abs_error = 0.0;   // on intensities
  double rel_l2_error = 0.0;
  double worst_z = 0.0;
  int worst_m = 0;
  std::vector<double> per_z_max;
  double threshold = 0.0;       // on rel_l2_error
  bool pass = false;
};

/// Cell-by-cell intensity comparison. Grids must share the z grid and the
/// site range exactly; otherwise throws std::invalid_argument.
CompareReport compare_grids(const PropagationGrid& a, const PropagationGrid& b,
                            double threshold);

enum class GridFormat { csv, json };

/// Picks the format from the file extension (".json" -> json, else csv).
GridFormat format_from_path(const std::filesystem::path& path);

/// Serialization is bit-exact round trip: doubles are written in
/// shortest-round-trip decimal form. Non-finite values are rejected.
/// Files are written atomically (temp file + rename).
void write_grid(const PropagationGrid& grid, const std::filesystem::path& path,
                GridFormat format);
PropagationGrid read_grid(const std::filesystem::path& path);
PropagationGrid read_grid(const std::filesystem::path& path, GridFormat format);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

/// Writes `content` to `path` through a temporary file plus rename.
void write_text_atomic(const std::string& content, const std::filesystem::path& path);

}  // namespace zigzag
