#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lyap/interval.hpp"

namespace lyap {

/// Uniform subdivision of a box. Cell index runs with axis 0 fastest.
class Grid {
 public:
  Grid() = default;
  Grid(IntervalVector bounds, std::vector<std::size_t> subdivisions);

  const IntervalVector& bounds() const noexcept { return bounds_; }
  const std::vector<std::size_t>& subdivisions() const noexcept { return subdivisions_; }
  std::size_t dimension() const noexcept { return bounds_.size(); }
  std::size_t size() const noexcept { return size_; }

  /// Boundary k (0..N) along an axis; consecutive cells share boundaries
  /// bitwise, so cells tile the bounds exactly.
  double boundary(std::size_t axis, std::size_t k) const { return edges_[axis][k]; }
  IntervalVector cell(std::size_t index) const;
  std::vector<std::size_t> multi_index(std::size_t index) const;
  std::size_t flat_index(const std::vector<std::size_t>& multi) const;

  /// Per-axis inclusive index ranges of cells meeting the box; false if
  /// the box leaves the grid bounds.
  bool cells_meeting(const IntervalVector& box, std::vector<std::size_t>& lo,
                     std::vector<std::size_t>& hi) const;
  /// Like cells_meeting, but drops a cell on either end of an axis when the
  /// box only touches its face; the remaining cells still cover the box.
  bool cells_covering(const IntervalVector& box, std::vector<std::size_t>& lo,
                      std::vector<std::size_t>& hi) const;

 private:
  IntervalVector bounds_;
  std::vector<std::size_t> subdivisions_;
  std::vector<std::vector<double>> edges_;
  std::size_t size_ = 0;
};

enum class Color { Blue, LightBlue, Yellow, Red };

/// Blue: both stages; LightBlue: stage 1 only; Yellow: stage 2 only;
/// Red: neither.
Color classify(bool stage1, bool stage2);
std::string color_name(Color c);
Color parse_color(const std::string& name);

struct CellVerdict {
  std::size_t index = 0;
  bool stage1 = false;
  bool stage2 = false;
  Color color() const { return classify(stage1, stage2); }
};

}  // namespace lyap
