#include "lyap/grid.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace lyap {

Grid::Grid(IntervalVector bounds, std::vector<std::size_t> subdivisions)
    : bounds_(std::move(bounds)), subdivisions_(std::move(subdivisions)) {
  if (bounds_.size() != subdivisions_.size())
    throw UsageError(fmt::format("grid: {} bounds but {} subdivision counts", bounds_.size(),
                                 subdivisions_.size()));
  if (bounds_.empty()) throw UsageError("grid: empty bounds");
  size_ = 1;
  for (std::size_t a = 0; a < bounds_.size(); ++a) {
    const std::size_t n = subdivisions_[a];
    if (n < 1) throw UsageError("grid: subdivisions must be >= 1");
    const double lo = bounds_[a].lo(), hi = bounds_[a].hi();
    if (!(hi > lo)) throw UsageError("grid: bounds must have positive width");
    std::vector<double> e(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
      e[k] = (k == 0) ? lo : (k == n) ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k)
      if (!(e[k] < e[k + 1])) throw UsageError("grid: subdivision too fine for the bounds");
    edges_.push_back(std::move(e));
    size_ *= n;
  }
}

std::vector<std::size_t> Grid::multi_index(std::size_t index) const {
  if (index >= size_) throw UsageError("grid: cell index out of range");
  std::vector<std::size_t> m(dimension());
  for (std::size_t a = 0; a < dimension(); ++a) {
    m[a] = index % subdivisions_[a];
    index /= subdivisions_[a];
  }
  return m;
}

std::size_t Grid::flat_index(const std::vector<std::size_t>& multi) const {
  std::size_t idx = 0;
  for (std::size_t a = dimension(); a-- > 0;) {
    if (multi[a] >= subdivisions_[a]) throw UsageError("grid: multi-index out of range");
    idx = idx * subdivisions_[a] + multi[a];
  }
  return idx;
}

IntervalVector Grid::cell(std::size_t index) const {
  auto m = multi_index(index);
  IntervalVector c(dimension());
  for (std::size_t a = 0; a < dimension(); ++a) c[a] = Interval(edges_[a][m[a]], edges_[a][m[a] + 1]);
  return c;
}

bool Grid::cells_meeting(const IntervalVector& box, std::vector<std::size_t>& lo,
                         std::vector<std::size_t>& hi) const {
  lo.assign(dimension(), 0);
  hi.assign(dimension(), 0);
  for (std::size_t a = 0; a < dimension(); ++a) {
    const auto& e = edges_[a];
    if (box[a].lo() < e.front() || box[a].hi() > e.back()) return false;
    // first k with e[k+1] >= l
    auto it = std::lower_bound(e.begin() + 1, e.end(), box[a].lo());
    lo[a] = static_cast<std::size_t>(it - e.begin()) - 1;
    // last k with e[k] <= u
    auto jt = std::upper_bound(e.begin(), e.end() - 1, box[a].hi());
    hi[a] = static_cast<std::size_t>(jt - e.begin()) - 1;
  }
  return true;
}

bool Grid::cells_covering(const IntervalVector& box, std::vector<std::size_t>& lo,
                          std::vector<std::size_t>& hi) const {
  if (!cells_meeting(box, lo, hi)) return false;
  for (std::size_t a = 0; a < dimension(); ++a) {
    const auto& e = edges_[a];
    if (hi[a] > lo[a] && box[a].hi() <= e[hi[a]]) --hi[a];
    if (hi[a] > lo[a] && box[a].lo() >= e[lo[a] + 1]) ++lo[a];
  }
  return true;
}

Color classify(bool stage1, bool stage2) {
  if (stage1 && stage2) return Color::Blue;
  if (stage1) return Color::LightBlue;
  if (stage2) return Color::Yellow;
  return Color::Red;
}

std::string color_name(Color c) {
  switch (c) {
    case Color::Blue: return "blue";
    case Color::LightBlue: return "lightblue";
    case Color::Yellow: return "yellow";
    case Color::Red: return "red";
  }
  return "red";
}

Color parse_color(const std::string& name) {
  if (name == "blue") return Color::Blue;
  if (name == "lightblue") return Color::LightBlue;
  if (name == "yellow") return Color::Yellow;
  if (name == "red") return Color::Red;
  throw UsageError(fmt::format("unknown color '{}'", name));
}

}  // namespace lyap
