#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lyap/linalg.hpp"
#include "lyapcli/verdicts.hpp"

namespace lyapcli {

struct SlicePlane {
  /// Plotted axes; empty picks the first free axes. One axis for 1-D tables.
  std::vector<std::size_t> axes;
  /// Fixed coordinates of the remaining axes.
  std::map<std::size_t, double> fixed;
};

/// Level sets of L(x) = (x - c)^T Y (x - c) drawn over the slice.
struct ContourSpec {
  lyap::Vec center;
  lyap::Mat y;
  std::vector<double> levels;
  /// Samples per plotted axis for marching squares.
  int resolution = 241;
};

struct SliceImage {
  std::string svg;
  std::size_t cells_drawn = 0;
  /// Set when no cell meets the plane.
  std::optional<std::string> warning;
};

SliceImage render_slice(const VerdictTable& table, const SlicePlane& plane,
                        const std::optional<ContourSpec>& contours = std::nullopt);

/// Segments of {g = level} over a rectangular sample grid; values are
/// row-major with nx columns. Endpoints are in sample-index coordinates.
struct Segment {
  double x0, y0, x1, y1;
};
std::vector<Segment> marching_squares(const std::vector<double>& values, int nx, int ny, double level);

}  // namespace lyapcli
