#include "lyapcli/verdicts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "lyap/errors.hpp"

namespace lyapcli {

VerdictTable VerdictTable::from_grid(const lyap::Grid& grid, const std::vector<lyap::CellVerdict>& cells) {
  VerdictTable t;
  t.dimension = grid.dimension();
  t.rows.reserve(cells.size());
  for (const auto& c : cells) t.rows.push_back({c.index, grid.cell(c.index), c.stage1, c.stage2, c.color()});
  return t;
}

lyap::IntervalVector VerdictTable::bounds() const {
  if (rows.empty()) return lyap::IntervalVector(dimension);
  lyap::IntervalVector b = rows.front().cell;
  for (const auto& r : rows) b = hull(b, r.cell);
  return b;
}

std::string write_csv(const VerdictTable& table) {
  std::string out = "cell_index";
  for (std::size_t a = 0; a < table.dimension; ++a) out += fmt::format(",axis{0}_lo,axis{0}_hi", a);
  out += ",stage1,stage2,color\n";
  for (const auto& r : table.rows) {
    out += fmt::format("{}", r.index);
    for (std::size_t a = 0; a < table.dimension; ++a) out += fmt::format(",{},{}", r.cell[a].lo(), r.cell[a].hi());
    out += fmt::format(",{},{},{}\n", r.stage1 ? 1 : 0, r.stage2 ? 1 : 0, lyap::color_name(r.color));
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

template <class T>
T field(const std::string& s, int line) {
  T v{};
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw lyap::UsageError(fmt::format("csv line {}: bad field '{}'", line, s));
  return v;
}

bool flag(const std::string& s, int line) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw lyap::UsageError(fmt::format("csv line {}: expected 0 or 1, got '{}'", line, s));
}

}  // namespace

VerdictTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw lyap::UsageError("csv: empty input");
  auto head = split(line);
  if (head.size() < 6 || (head.size() - 4) % 2 != 0 || head.front() != "cell_index" ||
      head[head.size() - 3] != "stage1" || head[head.size() - 2] != "stage2" || head.back() != "color")
    throw lyap::UsageError("csv line 1: unexpected header");
  VerdictTable t;
  t.dimension = (head.size() - 4) / 2;
  for (std::size_t a = 0; a < t.dimension; ++a)
    if (head[1 + 2 * a] != fmt::format("axis{}_lo", a) || head[2 + 2 * a] != fmt::format("axis{}_hi", a))
      throw lyap::UsageError("csv line 1: unexpected header");
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line == "\r") continue;
    auto f = split(line);
    if (f.size() != head.size())
      throw lyap::UsageError(fmt::format("csv line {}: expected {} fields, got {}", n, head.size(), f.size()));
    VerdictRow r;
    r.index = field<std::size_t>(f[0], n);
    r.cell = lyap::IntervalVector(t.dimension);
    for (std::size_t a = 0; a < t.dimension; ++a) {
      double lo = field<double>(f[1 + 2 * a], n), hi = field<double>(f[2 + 2 * a], n);
      if (!(lo <= hi)) throw lyap::UsageError(fmt::format("csv line {}: lo > hi on axis {}", n, a));
      r.cell[a] = lyap::Interval(lo, hi);
    }
    r.stage1 = flag(f[f.size() - 3], n);
    r.stage2 = flag(f[f.size() - 2], n);
    try {
      r.color = lyap::parse_color(f.back());
    } catch (const lyap::Error&) {
      throw lyap::UsageError(fmt::format("csv line {}: unknown color '{}'", n, f.back()));
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lyap::UsageError(fmt::format("{}: cannot open for reading", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lyap::UsageError(fmt::format("{}: cannot open for writing", path));
  out << content;
  if (!out) throw lyap::UsageError(fmt::format("{}: write failed", path));
}

}  // namespace lyapcli
