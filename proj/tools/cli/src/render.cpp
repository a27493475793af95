#include "lyapcli/render.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lyap/errors.hpp"

namespace lyapcli {

namespace {

constexpr double kPlot = 560.0;
constexpr double kMargin = 50.0;
constexpr double kLegend = 150.0;
constexpr double kRibbon = 60.0;

const char* fill(lyap::Color c) {
  switch (c) {
    case lyap::Color::Blue: return "#1f3fd6";
    case lyap::Color::LightBlue: return "#8fc8f5";
    case lyap::Color::Yellow: return "#f2d23c";
    case lyap::Color::Red: return "#d8312b";
  }
  return "#000000";
}

bool meets(const lyap::Interval& range, double v, double upper) {
  // Half-open cells so a plane on a shared face picks one layer.
  return range.lo() <= v && (v < range.hi() || (v == range.hi() && v == upper));
}

}  // namespace

std::vector<Segment> marching_squares(const std::vector<double>& g, int nx, int ny, double level) {
  std::vector<Segment> out;
  auto at = [&](int i, int j) { return g[static_cast<std::size_t>(j) * nx + i] - level; };
  auto cross = [](double a, double b) { return a / (a - b); };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const double v00 = at(i, j), v10 = at(i + 1, j), v11 = at(i + 1, j + 1), v01 = at(i, j + 1);
      // Edge points: bottom, right, top, left.
      std::vector<std::pair<double, double>> p;
      std::vector<int> edge;
      if ((v00 < 0) != (v10 < 0)) p.push_back({i + cross(v00, v10), j}), edge.push_back(0);
      if ((v10 < 0) != (v11 < 0)) p.push_back({i + 1.0, j + cross(v10, v11)}), edge.push_back(1);
      if ((v01 < 0) != (v11 < 0)) p.push_back({i + cross(v01, v11), j + 1.0}), edge.push_back(2);
      if ((v00 < 0) != (v01 < 0)) p.push_back({i, j + cross(v00, v01)}), edge.push_back(3);
      if (p.size() == 2) {
        out.push_back({p[0].first, p[0].second, p[1].first, p[1].second});
      } else if (p.size() == 4) {
        // Saddle: pair by the sign of the bilinear center value.
        const double mid = 0.25 * (v00 + v10 + v11 + v01);
        const bool join_bottom_right = (mid < 0) == (v00 < 0);
        if (join_bottom_right) {
          out.push_back({p[0].first, p[0].second, p[1].first, p[1].second});
          out.push_back({p[2].first, p[2].second, p[3].first, p[3].second});
        } else {
          out.push_back({p[0].first, p[0].second, p[3].first, p[3].second});
          out.push_back({p[1].first, p[1].second, p[2].first, p[2].second});
        }
      }
    }
  return out;
}

SliceImage render_slice(const VerdictTable& table, const SlicePlane& plane,
                        const std::optional<ContourSpec>& contours) {
  const std::size_t n = table.dimension;
  if (n == 0) throw lyap::UsageError("render: empty table");
  std::vector<std::size_t> axes = plane.axes;
  for (const auto& [a, v] : plane.fixed)
    if (a >= n) throw lyap::UsageError(fmt::format("render: slice axis {} out of range", a));
  if (axes.empty())
    for (std::size_t a = 0; a < n && axes.size() < 2; ++a)
      if (!plane.fixed.count(a)) axes.push_back(a);
  const bool ribbon = n == 1;
  if (ribbon ? axes.size() != 1 : axes.size() != 2)
    throw lyap::UsageError(ribbon ? "render: 1-D tables plot a single axis" : "render: two plotted axes required");
  for (std::size_t a : axes) {
    if (a >= n) throw lyap::UsageError(fmt::format("render: axis {} out of range", a));
    if (plane.fixed.count(a)) throw lyap::UsageError(fmt::format("render: axis {} is both plotted and fixed", a));
  }
  if (axes.size() == 2 && axes[0] == axes[1]) throw lyap::UsageError("render: plotted axes must differ");
  for (std::size_t a = 0; a < n; ++a)
    if (std::find(axes.begin(), axes.end(), a) == axes.end() && !plane.fixed.count(a))
      throw lyap::UsageError(fmt::format("render: axis {} needs a fixed value (axis=value)", a));

  const lyap::IntervalVector bounds = table.bounds();
  const double x0 = bounds[axes[0]].lo(), x1 = bounds[axes[0]].hi();
  const double y0 = ribbon ? 0.0 : bounds[axes[1]].lo(), y1 = ribbon ? 1.0 : bounds[axes[1]].hi();
  const double height = ribbon ? kRibbon : kPlot;
  auto px = [&](double x) { return kMargin + (x - x0) / (x1 - x0) * kPlot; };
  auto py = [&](double y) { return kMargin + (y1 - y) / (y1 - y0) * height; };

  SliceImage img;
  std::string body;
  for (const auto& r : table.rows) {
    bool in = true;
    for (const auto& [a, v] : plane.fixed)
      if (!meets(r.cell[a], v, bounds[a].hi())) in = false;
    if (!in) continue;
    const double cx0 = px(r.cell[axes[0]].lo()), cx1 = px(r.cell[axes[0]].hi());
    const double cy0 = ribbon ? py(1.0) : py(r.cell[axes[1]].hi());
    const double cy1 = ribbon ? py(0.0) : py(r.cell[axes[1]].lo());
    body += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"{}\"/>\n", cx0,
                        cy0, cx1 - cx0, cy1 - cy0, fill(r.color));
    ++img.cells_drawn;
  }

  std::string fixed_label;
  for (const auto& [a, v] : plane.fixed) fixed_label += fmt::format(" x{}={}", a, v);
  if (img.cells_drawn == 0) {
    img.warning = fmt::format("render: no cell meets the slice{}", fixed_label);
    img.svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"0\" height=\"0\"/>\n";
    return img;
  }

  if (contours && !contours->levels.empty() && !ribbon) {
    const int res = std::max(contours->resolution, 3);
    std::vector<double> g(static_cast<std::size_t>(res) * res);
    lyap::Vec x(static_cast<Eigen::Index>(n));
    for (const auto& [a, v] : plane.fixed) x(static_cast<Eigen::Index>(a)) = v;
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        x(static_cast<Eigen::Index>(axes[0])) = x0 + (x1 - x0) * i / (res - 1);
        x(static_cast<Eigen::Index>(axes[1])) = y0 + (y1 - y0) * j / (res - 1);
        lyap::Vec d = x - contours->center;
        g[static_cast<std::size_t>(j) * res + i] = d.dot(contours->y * d);
      }
    for (double level : contours->levels) {
      std::string path;
      for (const auto& s : marching_squares(g, res, res, level)) {
        auto sx = [&](double i) { return px(x0 + (x1 - x0) * i / (res - 1)); };
        auto sy = [&](double j) { return py(y0 + (y1 - y0) * j / (res - 1)); };
        path += fmt::format("M{:.3f} {:.3f}L{:.3f} {:.3f}", sx(s.x0), sy(s.y0), sx(s.x1), sy(s.y1));
      }
      if (!path.empty())
        body += fmt::format("<path d=\"{}\" stroke=\"#000000\" stroke-width=\"1.2\" fill=\"none\"/>\n", path);
    }
  } else if (contours && !contours->levels.empty() && ribbon) {
    // Level points of the 1-D form as ticks.
    const double y = contours->y(0, 0), c = contours->center(0);
    for (double level : contours->levels) {
      if (y == 0.0 || level / y < 0.0) continue;
      const double r = std::sqrt(level / y);
      for (double p : {c - r, c + r})
        if (p >= x0 && p <= x1)
          body += fmt::format("<line x1=\"{0:.3f}\" y1=\"{1:.3f}\" x2=\"{0:.3f}\" y2=\"{2:.3f}\" stroke=\"#000000\"/>\n",
                              px(p), py(1.0), py(0.0));
    }
  }

  const double w = kPlot + 2 * kMargin + kLegend, h = height + 2 * kMargin;
  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n",
      w, h);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n", w, h);
  svg += body;
  svg += fmt::format("<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" stroke=\"#000000\"/>\n",
                     kMargin, kMargin, kPlot, height);
  svg += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" text-anchor=\"middle\">x{}</text>\n", kMargin + kPlot / 2,
                     h - 12.0, axes[0]);
  svg += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\">{}</text>\n", kMargin, h - 28.0, x0);
  svg += fmt::format("<text x=\"{:.3f}\" y=\"{:.3f}\" text-anchor=\"end\">{}</text>\n", kMargin + kPlot, h - 28.0, x1);
  if (!ribbon) {
    svg += fmt::format("<text x=\"14\" y=\"{:.3f}\">x{}</text>\n", kMargin + height / 2, axes[1]);
    svg += fmt::format("<text x=\"4\" y=\"{:.3f}\">{}</text>\n", kMargin + height, y0);
    svg += fmt::format("<text x=\"4\" y=\"{:.3f}\">{}</text>\n", kMargin - 4.0, y1);
  }
  if (!fixed_label.empty())
    svg += fmt::format("<text x=\"{:.3f}\" y=\"30\">{}</text>\n", kMargin, fixed_label.substr(1));
  const double lx = kPlot + 2 * kMargin - 20.0;
  const lyap::Color legend[] = {lyap::Color::Blue, lyap::Color::LightBlue, lyap::Color::Yellow, lyap::Color::Red};
  for (int i = 0; i < 4; ++i) {
    const double ly = kMargin + 22.0 * i;
    svg += fmt::format("<rect x=\"{:.0f}\" y=\"{:.0f}\" width=\"14\" height=\"14\" fill=\"{}\"/>\n", lx, ly,
                       fill(legend[i]));
    svg += fmt::format("<text x=\"{:.0f}\" y=\"{:.0f}\">{}</text>\n", lx + 20, ly + 11, lyap::color_name(legend[i]));
  }
  svg += "</svg>\n";
  img.svg = std::move(svg);
  return img;
}

}  // namespace lyapcli
