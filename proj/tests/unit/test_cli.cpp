#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "lyap/errors.hpp"
#include "lyap/grid.hpp"
#include "lyapcli/config.hpp"
#include "lyapcli/equilibria.hpp"
#include "lyapcli/render.hpp"
#include "lyapcli/tasks.hpp"
#include "lyapcli/verdicts.hpp"

using lyap::Interval;
using lyap::IntervalVector;
using namespace lyapcli;

namespace {

std::filesystem::path tmp_dir(const std::string& leaf) {
  const char* base = std::getenv("LYAP_TEST_TMP");
  auto p = std::filesystem::path(base && *base ? base : std::filesystem::temp_directory_path().string()) / leaf;
  std::filesystem::create_directories(p);
  return p;
}

std::string error_of(const std::string& text, std::optional<Task> t = std::nullopt) {
  try {
    RunConfig::from_file(ConfigFile::parse(text, "c.cfg"), t);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

std::vector<lyap::CellVerdict> blank(const lyap::Grid& g) {
  std::vector<lyap::CellVerdict> cells(g.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i].index = i;
  return cells;
}

}  // namespace

TEST_CASE("config diagnostics carry line numbers") {
  CHECK(error_of("task = flow-grid\nsystem\n") == "c.cfg:2: expected 'key = value'");
  CHECK(error_of("task = flow-grid\n# c\nsystem = linear\nsystem = cubic_1d\n").find("c.cfg:4: duplicate key 'system'") == 0);
  auto unknown = error_of("task = flow-grid\nsystem = cubic_1d\ndomain = [-1,1]\nsubdivisions = 4\ncenter = 0\nspeed = 3\n");
  CHECK(unknown.find("c.cfg:6") != std::string::npos);
  CHECK(unknown.find("speed") != std::string::npos);
  CHECK(error_of("task = flow-grid\nsystem = cubic_1d\ndomain = [-1,1]\nsubdivisions = 0\n").find("c.cfg:4") == 0);
  CHECK(error_of("task = flow-grid\nsystem = cubic_1d\ndomain = [1,-1]\n").find("c.cfg:3") == 0);
  CHECK(error_of("task = periodic\n", Task::FlowGrid).find("c.cfg:1") == 0);
  CHECK(error_of("task = orbit\n").find("c.cfg:1") == 0);
  CHECK_THROWS_AS(ConfigFile::load("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("config values") {
  auto f = ConfigFile::parse(
      "task = flow-grid  # trailing\nsystem = fitzhugh_nagumo\nparam.gamma = 20\n"
      "domain = [-0.5,0.5] [-0.5,0.5] [-0.5,0.5]\nsubdivisions = 2 3 4\ncenter = 0, 0, 0\n"
      "m = 1 2 3\nstage2_splits = 2\n");
  auto c = RunConfig::from_file(f);
  CHECK(c.task == Task::FlowGrid);
  CHECK(c.parameters.at("gamma") == 20);
  REQUIRE(c.domain);
  CHECK((*c.domain)[1] == Interval(-0.5, 0.5));
  CHECK(c.subdivisions == std::vector<std::size_t>{2, 3, 4});
  CHECK(c.m == std::vector<double>{1, 2, 3});
  CHECK(c.stage2_splits == 2);
  CHECK(merged_parameters("fitzhugh_nagumo", c.parameters).at("gamma") == 20);
  for (const char* t : {"equilibria", "flow-grid", "map-grid", "poincare", "periodic", "trace"})
    CHECK(task_name(parse_task(t)) == t);
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : std::filesystem::directory_iterator(LYAP_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(RunConfig::from_file(ConfigFile::load(e.path().string())));
  }
}

TEST_CASE("verdict csv round trip") {
  lyap::Grid grid(IntervalVector{Interval(-1, 1), Interval(0.1, 0.7)}, {3, 2});
  std::vector<lyap::CellVerdict> cells(grid.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].stage1 = i % 2 == 0;
    cells[i].stage2 = i % 3 != 0;
    cells[i].index = i;
  }
  auto table = VerdictTable::from_grid(grid, cells);
  std::string csv = write_csv(table);
  CHECK(csv.rfind("cell_index,axis0_lo,axis0_hi,axis1_lo,axis1_hi,stage1,stage2,color\n", 0) == 0);
  auto back = parse_csv(csv);
  REQUIRE(back.rows.size() == table.rows.size());
  CHECK(back.dimension == 2);
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    CHECK(back.rows[i].index == table.rows[i].index);
    CHECK(back.rows[i].stage1 == table.rows[i].stage1);
    CHECK(back.rows[i].stage2 == table.rows[i].stage2);
    CHECK(back.rows[i].color == table.rows[i].color);
    for (std::size_t a = 0; a < 2; ++a) CHECK(back.rows[i].cell[a] == table.rows[i].cell[a]);
  }
  CHECK(write_csv(back) == csv);
  CHECK(back.bounds()[1] == Interval(0.1, 0.7));

  std::string bad = csv + "7,0,1,0,1,yes,0,blue\n";
  try {
    parse_csv(bad);
    FAIL("accepted a malformed row");
  } catch (const lyap::UsageError& e) {
    CHECK(std::string(e.what()).find("8") != std::string::npos);
  }
}

TEST_CASE("render") {
  lyap::Grid grid(IntervalVector{Interval(-1, 1), Interval(-1, 1)}, {4, 4});
  std::vector<lyap::CellVerdict> cells(grid.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = {i, true, true};
  auto table = VerdictTable::from_grid(grid, cells);

  auto img = render_slice(table, {});
  CHECK_FALSE(img.warning);
  CHECK(img.cells_drawn == 16);
  CHECK(render_slice(table, {}).svg == img.svg);
  // Every cell rectangle is blue; legend swatches add one per color.
  std::string blue = img.svg.substr(0, img.svg.find("width=\"14\""));
  CHECK(count(blue, "fill=\"#") == 16 + 1);

  lyap::Mat y = lyap::Mat::Identity(2, 2);
  auto contour = render_slice(table, {}, ContourSpec{lyap::Vec::Zero(2), y, {0.25}});
  CHECK(contour.svg.find("<path") != std::string::npos);

  lyap::Grid g3(IntervalVector{Interval(0, 1), Interval(0, 1), Interval(0, 1)}, {2, 2, 2});
  auto t3 = VerdictTable::from_grid(g3, blank(g3));
  auto empty = render_slice(t3, SlicePlane{{0, 1}, {{2, 5.0}}});
  CHECK(empty.warning);
  CHECK(empty.cells_drawn == 0);
  CHECK(empty.svg.find("width=\"0\"") != std::string::npos);
  CHECK(render_slice(t3, SlicePlane{{0, 1}, {{2, 0.25}}}).cells_drawn == 4);
  CHECK_THROWS_AS(render_slice(t3, SlicePlane{{0, 1}, {}}), lyap::UsageError);
  CHECK_THROWS_AS(render_slice(t3, SlicePlane{{0, 0}, {{2, 0.5}}}), lyap::UsageError);

  lyap::Grid g1(IntervalVector{Interval(-1, 1)}, {8});
  auto ribbon = render_slice(VerdictTable::from_grid(g1, blank(g1)), {},
                             ContourSpec{lyap::Vec::Zero(1), lyap::Mat::Identity(1, 1), {0.25}});
  CHECK(ribbon.cells_drawn == 8);
  CHECK(count(ribbon.svg, "<line") == 2);
}

TEST_CASE("marching squares") {
  // g = x^2 + y^2 sampled on a 21 x 21 grid over [-1, 1]^2.
  const int n = 21;
  std::vector<double> g(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      double x = -1 + 2.0 * i / (n - 1), y = -1 + 2.0 * j / (n - 1);
      g[j * n + i] = x * x + y * y;
    }
  auto segs = marching_squares(g, n, n, 0.25);
  CHECK(segs.size() > 8);
  for (const auto& s : segs)
    for (auto [i, j] : {std::pair{s.x0, s.y0}, std::pair{s.x1, s.y1}}) {
      double x = -1 + 2.0 * i / (n - 1), y = -1 + 2.0 * j / (n - 1);
      CHECK(std::abs(std::hypot(x, y) - 0.5) < 0.02);
    }
  CHECK(marching_squares(g, n, n, 5.0).empty());
}

TEST_CASE("equilibrium search") {
  EquilibriumOptions o;
  o.threads = 1;
  {
    auto f = lyap::builtin("fitzhugh_nagumo", lyap::default_parameters("fitzhugh_nagumo"));
    lyap::Grid grid(IntervalVector{Interval(-0.5, 1.5), Interval(-0.5, 0.5), Interval(-0.5, 0.5)}, {8, 4, 4});
    auto res = find_equilibria(f, grid, o);
    REQUIRE(res.zeros.size() == 3);
    CHECK(res.unresolved.empty());
    const double us[] = {0.0, (1.2 - std::sqrt(0.44)) / 2, (1.2 + std::sqrt(0.44)) / 2};
    for (int k = 0; k < 3; ++k) {
      lyap::Vec mid = res.zeros[k].enclosure.mid();
      CHECK(std::abs(mid(0) - us[k]) < 1e-12);
      CHECK(std::abs(mid(1)) < 1e-12);
      CHECK(std::abs(mid(2) - us[k] / 20) < 1e-12);
      CHECK(res.zeros[k].enclosure.max_width() < 1e-10);
    }
  }
  {
    auto f = lyap::builtin("cubic_1d", {});
    auto res = find_equilibria(f, lyap::Grid(IntervalVector{Interval(-2, 2)}, {7}), o);
    REQUIRE(res.zeros.size() == 3);
    CHECK(res.zeros[0].enclosure[0].contains(-1.0));
    CHECK(res.zeros[1].enclosure[0].contains(0.0));
    CHECK(res.zeros[2].enclosure[0].contains(1.0));
  }
  {
    auto f = lyap::builtin("linear_diag", {{"lambda1", -1.0}, {"lambda2", -2.0}});
    auto res = find_equilibria(f, lyap::Grid(IntervalVector{Interval(-1, 1), Interval(-1, 1)}, {3, 3}), o);
    REQUIRE(res.zeros.size() == 1);
    CHECK(res.zeros[0].enclosure.contains(lyap::Vec::Zero(2)));
  }
}

TEST_CASE("flow-grid run writes the full table") {
  auto cfg = RunConfig::from_file(ConfigFile::parse(
      "task = flow-grid\nsystem = fitzhugh_nagumo\nparam.a = 0.2\nparam.c = 5\nparam.delta = 5\n"
      "param.eps = 0.15\nparam.gamma = 20\ndomain = [-0.5,0.5] [-0.5,0.5] [-0.5,0.5]\n"
      "subdivisions = 20 20 20\ncenter = 0 0 0\noutput.svg = s.svg\nrender.slice = 1=0.05\nrender.levels = 0\n"));
  RunContext ctx;
  ctx.out_dir = tmp_dir("flow_grid");
  ctx.log = [](const std::string&) {};
  auto rep = run(cfg, ctx);
  auto table = parse_csv(read_file((ctx.out_dir / "verdicts.csv").string()));
  CHECK(table.rows.size() == 8000);
  CHECK(rep.summary.at("cells") == 8000);
  CHECK(rep.summary.at("equilibrium").at("verified") == true);
  std::size_t blue = 0;
  for (const auto& r : table.rows) blue += r.color == lyap::Color::Blue;
  CHECK(blue == rep.summary.at("counts").at("blue").get<std::size_t>());
  CHECK(blue > 0);
  CHECK(std::filesystem::exists(ctx.out_dir / "s.svg"));
  CHECK(std::filesystem::exists(ctx.out_dir / "summary.json"));

  // Same inputs, same bytes.
  RunContext again = ctx;
  again.out_dir = tmp_dir("flow_grid_again");
  again.threads = 1;
  run(cfg, again);
  CHECK(read_file((again.out_dir / "verdicts.csv").string()) == read_file((ctx.out_dir / "verdicts.csv").string()));
}

TEST_CASE("run errors") {
  RunContext ctx;
  ctx.out_dir = tmp_dir("errors");
  ctx.log = [](const std::string&) {};
  auto cfg = RunConfig::from_file(ConfigFile::parse("task = flow-grid\nsystem = cubic_1d\ndomain = [-1,1]\nsubdivisions = 4\n"));
  CHECK_THROWS_AS(run(cfg, ctx), lyap::UsageError);
  cfg = RunConfig::from_file(ConfigFile::parse("task = flow-grid\nsystem = warp\ndomain = [-1,1]\nsubdivisions = 4\ncenter = 0\n"));
  CHECK_THROWS_AS(run(cfg, ctx), lyap::UsageError);
}
