// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <fmt/format.h>

#include "lyap/errors.hpp"
#include "lyap/grid.hpp"
#include "lyap/lyapunov_flow.hpp"
#include "lyap/lyapunov_map.hpp"
#include "lyap/odeint.hpp"
#include "lyap/periodic.hpp"
#include "lyap/poincare.hpp"
#include "lyap/reference.hpp"
#include "lyap/systems.hpp"
#include "lyapcli/config.hpp"
#include "lyapcli/equilibria.hpp"
#include "lyapcli/render.hpp"
#include "lyapcli/tasks.hpp"
#include "lyapcli/verdicts.hpp"

using lyap::Expr;
using lyap::Grid;
using lyap::Interval;
using lyap::IntervalMatrix;
using lyap::IntervalVector;
using lyap::Mat;
using lyap::Vec;
using json = nlohmann::json;

namespace {

std::filesystem::path g_out = "acceptance_out";

// Collects sub-checks; the criterion passes when all of them do.
struct Report {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!") + what);
  }
  void info(const std::string& what) { notes.push_back("(" + what + ")"); }
};

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

Mat mat3(std::initializer_list<double> v) {
  Mat m(3, 3);
  auto it = v.begin();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = *it++;
  return m;
}

lyap::VectorField named(const std::string& name) { return lyap::builtin(name, lyap::default_parameters(name)); }
lyap::VectorField linear(double a, double b) { return lyap::builtin("linear_diag", {{"lambda1", a}, {"lambda2", b}}); }
IntervalVector box1(double lo, double hi) { return IntervalVector{Interval(lo, hi)}; }
IntervalVector cube(const Vec& c, double r) { return IntervalVector::from_bounds(c.array() - r, c.array() + r); }

Interval jint(const json& j) { return Interval(j.at(0).get<double>(), j.at(1).get<double>()); }
IntervalVector jbox(const json& j) {
  IntervalVector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = jint(j[i]);
  return v;
}
bool overlaps(const Interval& a, const Interval& b) { return a.lo() <= b.hi() && b.lo() <= a.hi(); }
bool overlaps(const IntervalVector& a, const IntervalVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!overlaps(a[i], b[i])) return false;
  return true;
}

std::string config_path(const std::string& name) { return (std::filesystem::path(LYAP_CONFIG_DIR) / name).string(); }

json run_config(const std::string& name) {
  auto cfg = lyapcli::RunConfig::from_file(lyapcli::ConfigFile::load(config_path(name)));
  lyapcli::RunContext ctx;
  ctx.out_dir = g_out;
  ctx.config_path = config_path(name);
  ctx.log = [](const std::string&) {};
  std::filesystem::create_directories(g_out);
  return lyapcli::run(cfg, ctx).summary;
}

std::string iv(const Interval& x) { return fmt::format("[{:.15g}, {:.15g}]", x.lo(), x.hi()); }

int stable_count_flow(const Mat& jac) {
  Eigen::EigenSolver<Mat> es(jac);
  int s = 0;
  for (auto l : es.eigenvalues()) s += l.real() < 0;
  return s;
}

// ------------------------------------------------------------------ criteria

const Vec kFnPrinted[3] = {vec({0, 0, 0}), vec({0.268337520964460, 0, 0.013416876048223}),
                           vec({0.931662479035540, 0, 0.046583123951777})};

std::vector<Vec> fn_equilibria(Report* r) {
  auto f = named("fitzhugh_nagumo");
  lyap::Grid grid(IntervalVector{Interval(-0.5, 1.5), Interval(-0.5, 0.5), Interval(-0.5, 0.5)}, {8, 4, 4});
  auto res = lyapcli::find_equilibria(f, grid);
  std::vector<Vec> mids;
  for (const auto& z : res.zeros) mids.push_back(z.enclosure.mid());
  if (r) {
    r->check(res.zeros.size() == 3, fmt::format("{} verified zeros", res.zeros.size()));
    r->check(res.unresolved.empty(), fmt::format("{} unresolved cells", res.unresolved.size()));
  }
  return mids;
}

void c1(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  auto mids = fn_equilibria(&r);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (mids.size() != 3) return;
  double err = 0, closed = 0;
  for (int k = 0; k < 3; ++k) err = std::max(err, (mids[k] - kFnPrinted[k]).cwiseAbs().maxCoeff());
  for (int k = 1; k < 3; ++k) {
    double u = (1.2 + (k == 1 ? -1 : 1) * std::sqrt(0.44)) / 2;
    closed = std::max(closed, (mids[k] - vec({u, 0, u / 20})).cwiseAbs().maxCoeff());
  }
  r.check(err <= 1e-12, fmt::format("printed midpoints err {:.2e}", err));
  r.check(closed <= 1e-12, fmt::format("closed form err {:.2e}", closed));
  r.check(secs < 1.0, fmt::format("{:.3f} s", secs));
}

void c2(Report& r) {
  const Mat printed[3] = {
      mat3({1.9045048614, -1.9684846596, -0.7930467270, -1.9684846596, -1.8022725548, 0.2703701350, -0.7930467270,
            0.2703701350, 2.3772099623}),
      mat3({-2.2485667721, 2.5290401659, 0.6528894939, 2.5290401659, -6.9945543958, -1.2823752332, 0.6528894939,
            -1.2823752332, 1.8533105010}),
      mat3({1.7202944579, -1.8934526570, -0.8110063777, -1.8934526570, -1.6051655895, 0.3062332874, -0.8110063777,
            0.3062332874, 2.4375167185})};
  auto f = named("fitzhugh_nagumo");
  auto mids = fn_equilibria(nullptr);
  if (mids.size() != 3) return r.check(false, "equilibria not found");
  double direct = 0, doubled = 0;
  bool fallback = true;
  for (int k = 0; k < 3; ++k) {
    auto q = lyap::build_quadratic_flow(f, mids[k]);
    direct = std::max(direct, (q.y - printed[k]).cwiseAbs().maxCoeff());
    doubled = std::max(doubled, (2 * q.y - printed[k]).cwiseAbs().maxCoeff());
    int stable = stable_count_flow(f.jacobian(mids[k]));
    bool sym = q.y == q.y.transpose();
    bool sig = q.positive == stable && q.negative == 3 - stable;
    bool s1 = lyap::stage1_flow(f, q, cube(mids[k], 1e-3));
    fallback = fallback && sym && sig && s1;
    r.info(fmt::format("x{}*: symmetric {} signature ({},{}) stable {} stage1 {}", k + 1, sym, q.positive,
                       q.negative, stable, s1));
  }
  r.info(fmt::format("max |Y - printed| {:.2e}, max |2Y - printed| {:.2e}", direct, doubled));
  if (direct <= 1e-6) r.check(true, "printed Y reproduced");
  else r.check(fallback, "fallback: symmetry, signature, stage 1 on 1e-3 cubes");
}

void c3(Report& r) {
  auto f = named("cubic_1d");
  auto q = lyap::build_quadratic_flow(f, Vec::Zero(1));
  r.check(lyap::stage1_flow(f, q, box1(0.55, 0.57)), "stage1 [0.55,0.57] true");
  r.check(!lyap::stage1_flow(f, q, box1(0.58, 0.60)), "stage1 [0.58,0.60] false");
  r.check(lyap::stage2_flow(f, q, box1(0.7, 0.8)), "stage2 [0.7,0.8] true");
  r.check(!lyap::stage2_flow(f, q, box1(0.9, 1.1)), "stage2 [0.9,1.1] false");
  r.check(lyap::hyperbolicity_check(f, box1(0, 0), box1(-0.5, 0.5)), "hyperbolic [-0.5,0.5] true");
  r.check(!lyap::hyperbolicity_check(f, box1(0, 0), box1(-0.7, 0.7)), "hyperbolic [-0.7,0.7] false");
}

void c4(Report& r) {
  auto t0 = std::chrono::steady_clock::now();
  json s = run_config("fn_d1_20.cfg");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto table = lyapcli::parse_csv(lyapcli::read_file((g_out / "fn_d1_20.csv").string()));
  r.check(table.rows.size() == 8000, fmt::format("{} rows", table.rows.size()));
  Vec c = lyapcli::vec_from_json(s.at("form").at("center"));
  Mat y = lyapcli::mat_from_json(s.at("form").at("y"));
  std::size_t blue = 0, yellow = 0, red_positive = 0, touching = 0, touching_certified = 0;
  for (const auto& row : table.rows) {
    blue += row.color == lyap::Color::Blue;
    yellow += row.color == lyap::Color::Yellow;
    if (row.cell.contains(Vec::Zero(3))) {
      ++touching;
      touching_certified += row.stage1;
    }
    if (row.color == lyap::Color::Red && row.cell[1].contains(0.05) &&
        lyap::quad_form(row.cell - c, y).lo() > 0)
      ++red_positive;
  }
  r.check(blue > 0, fmt::format("blue {}", blue));
  r.check(touching > 0 && touching_certified == touching,
          fmt::format("{}/{} cells at x1* pass stage 1", touching_certified, touching));
  r.check(s.at("uniqueness").at("unique").get<bool>(), s.at("uniqueness").at("message").get<std::string>());
  r.check(yellow > 0, fmt::format("yellow {}", yellow));
  r.check(red_positive > 0, fmt::format("{} red cells with L > 0 on v=0.05", red_positive));
  r.info(fmt::format("{:.1f} s", secs));
}

void c5(Report& r) {
  auto f = linear(-1, 2);
  auto q1 = lyap::build_quadratic_flow(f, Vec::Zero(2), {{1, 1}});
  auto q10 = lyap::build_quadratic_flow(f, Vec::Zero(2), {{10, 1}});
  auto s1 = lyap::zero_level_slopes(q1.y), s10 = lyap::zero_level_slopes(q10.y);
  if (s1.size() != 2 || s10.size() != 2) return r.check(false, "no zero-level cone");
  double ratio = s10[1] / s1[1];
  r.check(std::abs(ratio - std::sqrt(10.0)) <= 1e-12, fmt::format("slope ratio {:.15g}", ratio));

  // Contour check: the drawn zero level of L_m lies on y = +-sqrt(10) x.
  const int n = 201;
  std::vector<double> g(n * n);
  auto at = [&](double i) { return -1 + 2.0 * i / (n - 1); };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g[j * n + i] = q10.value(vec({at(i), at(j)}));
  double worst = 0;
  auto segs = lyapcli::marching_squares(g, n, n, 0.0);
  for (const auto& sg : segs)
    for (auto [i, j] : {std::pair{sg.x0, sg.y0}, std::pair{sg.x1, sg.y1}})
      worst = std::max(worst, std::abs(std::abs(at(j)) - std::sqrt(10.0) * std::abs(at(i))));
  r.check(!segs.empty() && worst < 2.0 / (n - 1) * 4, fmt::format("contour off the cone by {:.1e}", worst));

  bool same = true;
  Grid grid(IntervalVector(2, Interval(-1, 1)), {16, 16});
  auto a = lyap::sweep_flow(f, q1, grid, {1});
  auto b = lyap::sweep_flow(f, lyap::build_quadratic_flow(f, Vec::Zero(2), {{7, 7}}), grid, {1});
  for (std::size_t i = 0; i < grid.size(); ++i) same = same && a.cells[i].color() == b.cells[i].color();
  auto fn = named("fitzhugh_nagumo");
  Grid g3(IntervalVector(3, Interval(-0.5, 0.5)), {8, 8, 8});
  auto c = lyap::sweep_flow(fn, lyap::build_quadratic_flow(fn, Vec::Zero(3)), g3, {1});
  auto d = lyap::sweep_flow(fn, lyap::build_quadratic_flow(fn, Vec::Zero(3), {{5, 5, 5}}), g3, {1});
  for (std::size_t i = 0; i < g3.size(); ++i) same = same && c.cells[i].color() == d.cells[i].color();
  r.check(same, "equal m leaves verdicts unchanged");
}

void c6(Report& r) {
  lyap::IntegratorConfig cfg;
  cfg.taylor_order = 5;
  cfg.steps = 100;
  lyap::VectorField decay("decay", {"x"}, {-Expr::var(0)});
  auto e = lyap::integrate(decay, box1(1, 1), 1.0, cfg);
  r.check(e.state[0].contains(std::exp(-1.0)) && e.state[0].width() <= 1e-8,
          fmt::format("e^-1 in {} width {:.2e}", iv(e.state[0]), e.state[0].width()));

  auto h = lyap::builtin("harmonic_oscillator", {{"omega", 1.0}});
  lyap::IntegratorConfig hc;
  hc.steps = 200;
  auto he = lyap::integrate(h, IntervalVector::point(vec({1, 0})), 2 * std::numbers::pi, hc);
  r.check(he.state.contains(vec({1, 0})), fmt::format("harmonic return width {:.2e}", he.state.max_width()));

  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> u(-0.5, 0.5), w(0, 1);
  struct Case {
    const char* name;
    double t, rad;
  };
  const Case cases[] = {{"planar_limit_cycle", 1.5, 1e-3},
                        {"fitzhugh_nagumo", 1.0, 1e-2},
                        {"rossler", 2.0, 1e-3},
                        {"lorenz_sinai_vul", 0.3, 1e-4}};
  int trials = 0, inside = 0;
  for (const Case& k : cases) {
    auto f = named(k.name);
    const auto n = static_cast<Eigen::Index>(f.dimension());
    for (int b = 0; b < 25; ++b) {
      Vec c(n);
      for (Eigen::Index i = 0; i < n; ++i) c[i] = u(rng);
      if (std::string(k.name) == "lorenz_sinai_vul") c[2] += 27;
      IntervalVector x0 = cube(c, k.rad);
      auto enc = lyap::integrate(f, x0, k.t, cfg, lyap::IntegrationMode::C1);
      for (int s = 0; s < 10; ++s) {
        Vec z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = x0[i].lo() + w(rng) * x0[i].width();
        Vec x;
        Mat v;
        lyap::reference_flow_c1(f, z, k.t, x, v);
        ++trials;
        inside += enc.state.contains(x) && enc.variational->contains(v);
      }
    }
  }
  r.check(trials == 1000 && inside == trials, fmt::format("{}/{} reference samples inside", inside, trials));
}

void c7(Report& r) {
  json s = run_config("limit_cycle_periodic.cfg");
  if (!s.at("verified").get<bool>()) return r.check(false, s.at("message").get<std::string>());
  Interval t = jint(s.at("period"));
  r.check(t.contains(2 * std::numbers::pi) && t.width() <= 1e-6, fmt::format("T {} width {:.2e}", iv(t), t.width()));
  Interval dp = jint(s.at("dp").at(0).at(0));
  const double mu = std::exp(-4 * std::numbers::pi);
  r.check(dp.contains(mu) && dp.width() / mu <= 1e-3,
          fmt::format("DP {} relative width {:.2e}", iv(dp), dp.width() / mu));
}

void c8(Report& r) {
  const IntervalVector x_printed{Interval(-3.33960829479577, -3.33960817367770),
                                 Interval(-0.03955770987867, -0.03955770858575),
                                 Interval(0.03932476640565, 0.03932477007120)};
  const Interval t_printed(5.72694905401293, 5.72694917018763);
  json s = run_config("rossler_periodic.cfg");
  if (!s.at("verified").get<bool>()) return r.check(false, s.at("message").get<std::string>());
  Interval t = jint(s.at("period"));
  IntervalVector x = jbox(s.at("point"));
  r.check(overlaps(t, t_printed), "T* " + iv(t));
  for (std::size_t i = 0; i < 3; ++i)
    r.check(overlaps(x[i], x_printed[i]), fmt::format("{}* {}", "uvw"[i], iv(x[i])));
  const json& m = s.at("multipliers");
  if (m.at("kind") != "real") return r.check(false, "multipliers not separated");
  Interval l1 = jint(m.at("first")), l2 = jint(m.at("second"));
  const Interval p1(-0.55389294656450, -0.53463411180113), p2(-0.00045527197787, 0.00037278836683);
  r.check((overlaps(l1, p1) && overlaps(l2, p2)) || (overlaps(l1, p2) && overlaps(l2, p1)),
          fmt::format("multipliers {} {}", iv(l1), iv(l2)));

  auto t0 = std::chrono::steady_clock::now();
  json mg = run_config("rossler_map_2x2.cfg");
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.check(mg.at("pairwise").at("verified").get<bool>(),
          fmt::format("pairwise 2x2 ({:.1f} s) {}", secs, mg.at("pairwise").at("message").get<std::string>()));
}

void c9(Report& r) {
  const Interval t_printed(0.68991868010675, 0.68991868537750);
  const Interval p1(1.03671803803776, 1.06505368292434), p2(-0.01460002975740, 0.01701745287359);
  Mat y_printed(2, 2);
  y_printed << -0.915485816680675, 0.474862621686875, 0.474862621686875, 0.915485816680675;
  json s = run_config("lorenz_periodic.cfg");
  if (!s.at("verified").get<bool>()) return r.check(false, s.at("message").get<std::string>());
  Interval t = jint(s.at("period"));
  r.check(overlaps(t, t_printed), "T* " + iv(t));
  const json& m = s.at("multipliers");
  if (m.at("kind") != "real") return r.check(false, "multipliers not separated");
  Interval l1 = jint(m.at("first")), l2 = jint(m.at("second"));
  r.check((overlaps(l1, p1) && overlaps(l2, p2)) || (overlaps(l1, p2) && overlaps(l2, p1)),
          fmt::format("multipliers {} {}", iv(l1), iv(l2)));
  if (!s.contains("form")) return r.check(false, "no quadratic form");
  Mat y = lyapcli::mat_from_json(s.at("form").at("y"));
  double err = (y - y_printed).cwiseAbs().maxCoeff();
  if (err <= 1e-4) return r.check(true, fmt::format("Y within {:.1e}", err));
  const json& sig = s.at("form").at("signature");
  bool stable1 = std::abs(l1.mid()) < 1, stable2 = std::abs(l2.mid()) < 1;
  int stable = stable1 + stable2;
  r.check(y == y.transpose() && sig.at("positive") == stable && sig.at("negative") == 2 - stable,
          fmt::format("Y off by {:.1e}; fallback signature ({},{})", err, sig.at("positive").get<int>(),
                      sig.at("negative").get<int>()));
}

void c10(Report& r) {
  auto sq = lyap::make_map_model(lyap::builtin_map("square_1d", {}));
  auto q = lyap::build_quadratic_map(sq, Vec::Zero(1));
  r.check(lyap::stage1_map_pairwise(sq, q, Grid(box1(-0.45, 0.45), {4}), {1}).verified, "pairwise [-0.45,0.45] true");
  r.check(!lyap::stage1_map_pairwise(sq, q, Grid(box1(-0.5, 0.5), {4}), {1}).verified, "pairwise [-0.5,0.5] false");
  r.check(lyap::stage2_map(sq, q, box1(0.6, 0.8)).passed(), "stage2 [0.6,0.8] true");
  r.check(lyap::stage2_map(sq, q, box1(0.9, 1.1)).outcome == lyap::Stage2Outcome::Fail, "stage2 [0.9,1.1] false");

  // psi(x, y) = (x^2, x^3) on [0,1] x {0}: psi(1,0) - psi(0,0) = (1, 1) lies in
  // the entrywise enclosure times (1, 0) but equals no single Dpsi(z)(1, 0).
  lyap::SmoothMap psi("twisted", {"x", "y"}, {sqr(Expr::var(0)), pow(Expr::var(0), 3)});
  IntervalMatrix a = lyap::eval_Df(psi, IntervalVector{Interval(0, 1), Interval(0)});
  Vec diff = psi(vec({1, 0})) - psi(vec({0, 0}));
  bool enclosed = mat_vec(a, IntervalVector::point(vec({1, 0}))).contains(diff);
  double gap = 1e300;
  for (int k = 0; k <= 100000; ++k) {
    double x = -2 + 4 * k / 100000.0;
    gap = std::min(gap, (psi.jacobian(vec({x, 0})).col(0) - diff).cwiseAbs().maxCoeff());
  }
  r.check(enclosed && gap > 0.05, fmt::format("mean-value trap: enclosed {}, gap {:.3f}", enclosed, gap));
}

void c11(Report& r) {
  auto f = linear(-1, -2);
  auto q = lyap::build_quadratic_flow(f, Vec::Zero(2));
  Grid grid(IntervalVector(2, Interval(-1, 1)), {8, 8});
  auto sweep = lyap::sweep_flow(f, q, grid, {1});
  std::vector<std::size_t> cert;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (sweep.certified[i]) cert.push_back(i);
  if (cert.empty()) return r.check(false, "no certified cells");
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0, closed = 0;
  int done = 0;
  while (done < 20) {
    IntervalVector cell = grid.cell(cert[rng() % cert.size()]);
    Vec x0(2);
    for (int i = 0; i < 2; ++i) x0[i] = cell[i].lo() + u(rng) * cell[i].width();
    if (x0.norm() < 0.05) continue;
    auto t = lyap::lyapunov_trace(f, q, x0, q.value(x0) / 100);
    worst = std::max(worst, t.crosscheck_error);
    Vec exact = vec({x0[0] * std::exp(-t.time), x0[1] * std::exp(-2 * t.time)});
    closed = std::max(closed, (exact - t.endpoint).cwiseAbs().maxCoeff());
    ++done;
  }
  r.check(worst <= 1e-8, fmt::format("20 starts, worst endpoint mismatch {:.2e}", worst));
  r.check(closed <= 1e-8, fmt::format("closed-form mismatch {:.2e}", closed));
}

struct Criterion {
  const char* title;
  std::function<void(Report&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::string out = g_out.string();
  app.add_option("--criterion", only, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("--out", out, "Directory for run artifacts")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  g_out = out;

  const Criterion all[] = {
      {"FitzHugh-Nagumo equilibria", c1},   {"FitzHugh-Nagumo Y matrices", c2}, {"cubic thresholds", c3},
      {"FitzHugh-Nagumo 20^3 grid", c4},    {"m-weights", c5},                  {"validated integrator", c6},
      {"limit cycle certificate", c7},      {"Rossler orbit and map", c8},      {"transformed Lorenz orbit", c9},
      {"map analytic suite", c10},          {"Lyapunov tracing", c11}};

  bool ok = true;
  for (int k = 1; k <= 11; ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    Report r;
    try {
      all[k - 1].run(r);
    } catch (const std::exception& e) {
      r.check(false, std::string("exception: ") + e.what());
    }
    std::string notes;
    for (const auto& n : r.notes) notes += (notes.empty() ? "" : "; ") + n;
    std::cout << fmt::format("{} {:>2} {}: {}", r.pass ? "PASS" : "FAIL", k, all[k - 1].title, notes) << std::endl;
    ok = ok && r.pass;
  }
  return ok ? 0 : 1;
}
