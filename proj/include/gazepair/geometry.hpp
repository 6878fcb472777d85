#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gazepair/rng.hpp"

namespace gazepair {

/// Discrete 3D grid the numbered holograms are placed on.
///
/// Index ranges are derived from the counts: x is centered on zero
/// (x in [-(x_count-1)/2 .. ...]), y starts at 0, depth planes are 1-based.
/// The in-plane origin cell (0,0) is reserved and never holds a hologram.
struct GridConfig {
  int x_count = 7;
  int y_count = 6;
  int z_count = 5;
  int hologram_count = 10;
  double cell_size = 1.0;
  double error_threshold = 0.5;

  int x_min() const { return -((x_count - 1) / 2); }
  int x_max() const { return x_min() + x_count - 1; }
  int y_min() const { return 0; }
  int y_max() const { return y_count - 1; }
  int z_min() const { return 1; }
  int z_max() const { return z_count; }

  // In-plane cells available to holograms (origin excluded).
  int placeable_cells() const { return x_count * y_count - 1; }

  void validate() const {
    if (x_count < 1 || y_count < 1 || z_count < 1)
      throw std::invalid_argument("grid: all axis counts must be >= 1");
    if (hologram_count < 1)
      throw std::invalid_argument("grid: hologram_count must be >= 1");
    if (hologram_count > placeable_cells())
      throw std::invalid_argument("grid: hologram_count exceeds available non-origin cells");
    if (cell_size <= 0.0)
      throw std::invalid_argument("grid: cell_size must be positive");
    if (error_threshold <= 0.0 || 2.0 * error_threshold > cell_size)
      throw std::invalid_argument("grid: error_threshold must satisfy 0 < 2*eps <= cell_size");
  }
};

struct GridCell {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline bool in_bounds(const GridCell& c, const GridConfig& g) {
  return c.x >= g.x_min() && c.x <= g.x_max() && c.y >= g.y_min() &&
         c.y <= g.y_max() && c.z >= g.z_min() && c.z <= g.z_max();
}

/// Renders a cell as the concatenation of its three signed axis indices,
/// e.g. (-2,2,1) -> "-221". No padding, no separators.
inline std::string cell_string(const GridCell& c) {
  std::string s;
  s.reserve(6);
  s += std::to_string(c.x);
  s += std::to_string(c.y);
  s += std::to_string(c.z);
  return s;
}

/// Continuous center of a cell. With cell_size = 1 this is the integer index
/// per axis.
inline Point3 cell_center(const GridCell& c, const GridConfig& g) {
  if (!in_bounds(c, g)) throw std::out_of_range("cell_center: cell outside grid");
  return {c.x * g.cell_size, c.y * g.cell_size, c.z * g.cell_size};
}

/// Nearest cell by per-axis rounding, without a bounds check. Exposed for
/// callers that quantize free points; protocol code uses discretize().
inline GridCell nearest_cell(const Point3& p, const GridConfig& g) {
  const auto q = [&](double v) { return static_cast<int>(std::lround(v / g.cell_size)); };
  return {q(p.x), q(p.y), q(p.z)};
}

/// Maps a point to its grid cell. Points outside the covered volume get
/// nullopt, which callers treat as a missed selection.
inline std::optional<GridCell> discretize_cell(const Point3& p, const GridConfig& g) {
  const GridCell c = nearest_cell(p, g);
  if (!in_bounds(c, g)) return std::nullopt;
  return c;
}

inline std::optional<std::string> discretize(const Point3& p, const GridConfig& g) {
  const auto c = discretize_cell(p, g);
  if (!c) return std::nullopt;
  return cell_string(*c);
}

/// Random placement of the numbered holograms: one depth plane shared by all
/// of them, cells drawn uniformly without replacement from the non-origin
/// in-plane cells. Entry i is the cell of the hologram labeled i.
struct HologramLayout {
  std::vector<GridCell> cells;
  int depth_plane = 1;

  const GridCell& cell_for_digit(int digit) const {
    if (digit < 0 || digit >= static_cast<int>(cells.size()))
      throw std::out_of_range("layout: digit has no hologram");
    return cells[static_cast<std::size_t>(digit)];
  }

  void validate(const GridConfig& g) const {
    if (static_cast<int>(cells.size()) != g.hologram_count)
      throw std::invalid_argument("layout: wrong hologram count");
    if (depth_plane < g.z_min() || depth_plane > g.z_max())
      throw std::invalid_argument("layout: depth plane outside grid");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const GridCell& a = cells[i];
      if (!in_bounds(a, g)) throw std::invalid_argument("layout: cell outside grid");
      if (a.z != depth_plane) throw std::invalid_argument("layout: cell off the shared plane");
      if (a.x == 0 && a.y == 0) throw std::invalid_argument("layout: origin cell is reserved");
      for (std::size_t j = i + 1; j < cells.size(); ++j) {
        const GridCell& b = cells[j];
        if (a == b) throw std::invalid_argument("layout: duplicate cell");
        const double dx = (a.x - b.x) * g.cell_size;
        const double dy = (a.y - b.y) * g.cell_size;
        if (std::sqrt(dx * dx + dy * dy) < 2.0 * g.error_threshold)
          throw std::invalid_argument("layout: cells closer than twice the error threshold");
      }
    }
  }
};

/// All in-plane cells a hologram may occupy, in a fixed scan order.
inline std::vector<GridCell> placeable_plane_cells(const GridConfig& g, int depth) {
  std::vector<GridCell> cells;
  cells.reserve(static_cast<std::size_t>(g.placeable_cells()));
  for (int y = g.y_min(); y <= g.y_max(); ++y)
    for (int x = g.x_min(); x <= g.x_max(); ++x)
      if (!(x == 0 && y == 0)) cells.push_back({x, y, depth});
  return cells;
}

inline HologramLayout generate_layout(const GridConfig& g, Rng& rng) {
  g.validate();
  const int depth = g.z_min() + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(g.z_count)));
  std::vector<GridCell> pool = placeable_plane_cells(g, depth);

  // Partial Fisher-Yates: the first hologram_count slots become the draw.
  HologramLayout layout;
  layout.depth_plane = depth;
  layout.cells.reserve(static_cast<std::size_t>(g.hologram_count));
  for (int i = 0; i < g.hologram_count; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) + rng.uniform_below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    layout.cells.push_back(pool[static_cast<std::size_t>(i)]);
  }
  return layout;
}

}  // namespace gazepair
