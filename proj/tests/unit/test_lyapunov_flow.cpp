#include <cmath>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "gen.hpp"
#include "lyap/errors.hpp"
#include "lyap/krawczyk.hpp"
#include "lyap/lyapunov_flow.hpp"
#include "lyap/systems.hpp"

using lyap::Expr;
using lyap::Grid;
using lyap::Interval;
using lyap::IntervalVector;
using lyap::Mat;
using lyap::Vec;
using lyap::VectorField;

namespace {

VectorField named(const std::string& name) { return lyap::builtin(name, lyap::default_parameters(name)); }
VectorField linear(double a, double b) { return lyap::builtin("linear_diag", {{"lambda1", a}, {"lambda2", b}}); }
VectorField decay() { return VectorField("decay", {"x"}, {-Expr::var(0)}); }

Vec vec(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

IntervalVector box1(double lo, double hi) { return IntervalVector{Interval(lo, hi)}; }

IntervalVector cube(const Vec& c, double r) { return IntervalVector::from_bounds(c.array() - r, c.array() + r); }

// Exact x2*, x3* of FitzHugh-Nagumo: v = 0, w = u / 20, u^2 - 1.2 u + 0.2 + 0.05 = 0.
Vec fn_equilibrium(int k) {
  if (k == 1) return Vec::Zero(3);
  double u = (1.2 + (k == 2 ? -1 : 1) * std::sqrt(0.44)) / 2;
  return vec({u, 0, u / 20});
}

int stable_count(const Mat& jac) {
  Eigen::EigenSolver<Mat> es(jac);
  int s = 0;
  for (auto l : es.eigenvalues()) s += l.real() < 0;
  return s;
}

}  // namespace

TEST_CASE("quadratic form of a diagonal saddle") {
  auto q = lyap::build_quadratic_flow(linear(-1, 2), Vec::Zero(2));
  CHECK((q.y - Mat(vec({1, -1}).asDiagonal())).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(q.positive == 1);
  CHECK(q.negative == 1);
  CHECK(q.y == q.y.transpose());
}

TEST_CASE("complex pair with orthonormal eigenvectors gives the identity") {
  // Eigenvalues -1 +- i, eigenvectors (1, +-i)/sqrt(2).
  VectorField spiral("spiral", {"x", "y"}, {-Expr::var(0) + Expr::var(1), -Expr::var(0) - Expr::var(1)});
  auto q = lyap::build_quadratic_flow(spiral, Vec::Zero(2));
  CHECK((q.y - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(q.imag_residual < 1e-14);
}

TEST_CASE("weights scale the construction") {
  auto f = linear(-1, 2);
  auto q1 = lyap::build_quadratic_flow(f, Vec::Zero(2));
  auto q3 = lyap::build_quadratic_flow(f, Vec::Zero(2), {{3, 3}});
  CHECK((q3.y - 3 * q1.y).cwiseAbs().maxCoeff() < 1e-14);
  auto qm = lyap::build_quadratic_flow(f, Vec::Zero(2), {{10, 1}});
  CHECK((qm.y - Mat(vec({10, -1}).asDiagonal())).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(lyap::build_quadratic_flow(f, Vec::Zero(2), {{1, -1}}), lyap::UsageError);
  CHECK_THROWS_AS(lyap::build_quadratic_flow(f, Vec::Zero(2), {{1, 1, 1}}), lyap::UsageError);
}

TEST_CASE("zero-level slopes") {
  auto s1 = lyap::zero_level_slopes(Mat(vec({1, -1}).asDiagonal()));
  REQUIRE(s1.size() == 2);
  CHECK(s1[0] == doctest::Approx(-1));
  CHECK(s1[1] == doctest::Approx(1));
  auto s10 = lyap::zero_level_slopes(Mat(vec({10, -1}).asDiagonal()));
  CHECK(s10[1] == doctest::Approx(std::sqrt(10.0)));
  CHECK(lyap::zero_level_slopes(Mat::Identity(2, 2)).empty());
}

TEST_CASE("non-hyperbolic centers are rejected") {
  CHECK_THROWS_AS(lyap::build_quadratic_flow(linear(0, -1), Vec::Zero(2)), lyap::NumericalError);
}

TEST_CASE("signature follows the stable and unstable counts") {
  auto fn = named("fitzhugh_nagumo");
  for (int k = 1; k <= 3; ++k) {
    Vec c = fn_equilibrium(k);
    auto q = lyap::build_quadratic_flow(fn, c);
    int s = stable_count(fn.jacobian(c));
    CHECK(q.positive == s);
    CHECK(q.negative == 3 - s);
    CHECK(q.y == q.y.transpose());
  }
  CHECK(stable_count(fn.jacobian(fn_equilibrium(2))) == 1);
}

TEST_CASE("stage 1 examples") {
  auto lin = linear(-1, 2);
  auto ql = lyap::build_quadratic_flow(lin, Vec::Zero(2));
  CHECK(lyap::stage1_flow(lin, ql, IntervalVector{Interval(-5, 7), Interval(-100, 3)}));

  auto cubic = named("cubic_1d");
  auto qc = lyap::build_quadratic_flow(cubic, Vec::Zero(1));
  CHECK(qc.y(0, 0) == doctest::Approx(-1));
  CHECK(lyap::stage1_flow(cubic, qc, box1(-0.5, 0.5)));
  CHECK_FALSE(lyap::stage1_flow(cubic, qc, box1(0.55, 0.65)));
  CHECK(lyap::stage1_flow(cubic, qc, box1(0.55, 0.57)));
  CHECK_FALSE(lyap::stage1_flow(cubic, qc, box1(0.58, 0.60)));
  CHECK(lyap::stage1_flow(cubic, qc, box1(0.55, 0.57), lyap::NegDefMethod::Cholesky));

  auto fn = named("fitzhugh_nagumo");
  auto qf = lyap::build_quadratic_flow(fn, Vec::Zero(3));
  Grid g(IntervalVector(3, Interval(-0.5, 0.5)), {50, 50, 50});
  CHECK(g.boundary(0, 25) == 0.0);
  CHECK(lyap::stage1_flow(fn, qf, g.cell(g.flat_index({25, 25, 25}))));
}

TEST_CASE("stage 2 examples") {
  auto d = decay();
  auto qd = lyap::build_quadratic_flow(d, Vec::Zero(1));
  CHECK(qd.y(0, 0) == doctest::Approx(1));
  CHECK(lyap::stage2_flow(d, qd, box1(0.1, 0.2)));

  auto cubic = named("cubic_1d");
  auto qc = lyap::build_quadratic_flow(cubic, Vec::Zero(1));
  CHECK(lyap::stage2_flow(cubic, qc, box1(0.7, 0.8)));
  CHECK_FALSE(lyap::stage1_flow(cubic, qc, box1(0.7, 0.8)));
  CHECK_FALSE(lyap::stage2_flow(cubic, qc, box1(0.9, 1.1)));
  // Cells touching the center cannot be strictly decreasing.
  CHECK_FALSE(lyap::stage2_flow(cubic, qc, box1(0.0, 0.1)));
}

TEST_CASE("derivative enclosure contains sampled values") {
  gen::Gen g(59);
  auto fn = named("fitzhugh_nagumo");
  auto q = lyap::build_quadratic_flow(fn, fn_equilibrium(2));
  for (int trial = 0; trial < 50; ++trial) {
    Vec lo = g.vec(3, -0.5, 1);
    IntervalVector cell = IntervalVector::from_bounds(lo, lo + g.vec(3, 0, 0.1));
    Interval dl = lyap::lyapunov_derivative(fn, q, cell);
    for (int s = 0; s < 20; ++s) {
      Vec x = g.member(cell);
      double exact = 2 * (x - q.center).dot(q.y * fn(x));
      CHECK(inflate(dl, 1e-13).contains(exact));
    }
  }
}

TEST_CASE("linear saddle sweep") {
  auto f = linear(-1, 2);
  auto q = lyap::build_quadratic_flow(f, Vec::Zero(2));
  Grid grid(IntervalVector(2, Interval(-1, 1)), {4, 4});
  auto r = lyap::sweep_flow(f, q, grid, {1});
  for (const auto& c : r.cells) {
    CHECK(c.stage1);
    // dL/dt = -2x^2 - 4y^2 vanishes only at the center.
    CHECK(c.stage2 == !grid.cell(c.index).contains(Vec(Vec::Zero(2))));
    CHECK(r.certified[c.index]);
  }
  CHECK(r.count(lyap::Color::Blue) == 12);
  CHECK(r.count(lyap::Color::LightBlue) == 4);
}

TEST_CASE("cubic strip matches the analytic thresholds") {
  auto f = named("cubic_1d");
  auto q = lyap::build_quadratic_flow(f, Vec::Zero(1));
  Grid grid(box1(-1.2, 1.2), {24});
  auto r = lyap::sweep_flow(f, q, grid, {1});
  for (const auto& c : r.cells) {
    Interval x = grid.cell(c.index)[0];
    double m = x.mag();
    bool s1 = 1 - 3 * m * m > 1e-9;
    bool s2 = !x.contains(0.0) && m < 1 - 1e-9;
    CAPTURE(c.index);
    CHECK(c.stage1 == s1);
    CHECK(c.stage2 == s2);
  }
  CHECK(r.count(lyap::Color::Blue) == 8);
  CHECK(r.count(lyap::Color::LightBlue) == 2);
  CHECK(r.count(lyap::Color::Yellow) == 8);
  CHECK(r.count(lyap::Color::Red) == 6);
}

TEST_CASE("hyperbolicity criterion") {
  CHECK(lyap::hyperbolicity_check(linear(-1, 2), IntervalVector(2, Interval(0)),
                                  IntervalVector(2, Interval(-10, 10))));
  auto cubic = named("cubic_1d");
  CHECK(lyap::hyperbolicity_check(cubic, box1(0, 0), box1(-0.5, 0.5)));
  CHECK_FALSE(lyap::hyperbolicity_check(cubic, box1(0, 0), box1(-0.7, 0.7)));
}

TEST_CASE("uniqueness reports") {
  auto lin = linear(-1, 2);
  auto ql = lyap::build_quadratic_flow(lin, Vec::Zero(2));
  auto rl = lyap::sweep_flow(lin, ql, Grid(IntervalVector(2, Interval(-1, 1)), {4, 4}), {1});
  auto ul = lyap::unique_equilibrium_report(rl, lyap::verify_zero(lin, Vec::Zero(2)));
  CHECK(ul.unique);
  CHECK(ul.region_cells == 16);

  auto cubic = named("cubic_1d");
  auto qc = lyap::build_quadratic_flow(cubic, Vec::Zero(1));
  auto zc = lyap::verify_zero(cubic, Vec::Zero(1));
  qc.center_box = zc.enclosure;
  auto rc = lyap::sweep_flow(cubic, qc, Grid(box1(-0.5, 0.5), {10}), {1});
  CHECK(lyap::unique_equilibrium_report(rc, zc).unique);
  // The center box must hold the enclosure.
  qc.center_box = IntervalVector{Interval(0.25)};
  CHECK_FALSE(lyap::unique_equilibrium_report(lyap::sweep_flow(cubic, qc, Grid(box1(-0.5, 0.5), {10}), {1}), zc).unique);

  auto fn = named("fitzhugh_nagumo");
  auto z = lyap::verify_zero(fn, fn_equilibrium(2));
  REQUIRE(z.verified);
  auto qf = lyap::build_quadratic_flow(fn, z.enclosure.mid());
  qf.center_box = z.enclosure;
  // At 20^3 no cell of this box passes stage 1; 25^3 is the first resolution that does.
  Grid d2(IntervalVector{Interval(0, 1), Interval(-0.5, 0.5), Interval(-0.5, 0.5)}, {25, 25, 25});
  auto rf = lyap::sweep_flow(fn, qf, d2, {1});
  auto uf = lyap::unique_equilibrium_report(rf, z);
  CHECK(uf.unique);
  CHECK(uf.region_cells > 0);

  lyap::KrawczykResult failed;
  failed.enclosure = IntervalVector(2, Interval(0));
  CHECK_FALSE(lyap::unique_equilibrium_report(rl, failed).unique);
}

TEST_CASE("stage 1 passes on small cells around hyperbolic equilibria") {
  struct Case {
    VectorField f;
    Vec c;
  };
  auto fn = named("fitzhugh_nagumo");
  std::vector<Case> cases{{fn, fn_equilibrium(1)}, {fn, fn_equilibrium(2)}, {fn, fn_equilibrium(3)},
                          {named("cubic_1d"), Vec::Zero(1)}, {linear(-3, 0.5), Vec::Zero(2)},
                          {named("planar_limit_cycle"), Vec::Zero(2)}};
  for (const auto& k : cases) {
    auto q = lyap::build_quadratic_flow(k.f, k.c);
    bool ok = false;
    for (double r = 0.1; r > 1e-8 && !ok; r /= 4) ok = lyap::stage1_flow(k.f, q, cube(k.c, r));
    CHECK(ok);
  }
}

TEST_CASE("stage 1 passes on every sub-cell of a passing cell") {
  auto fn = named("fitzhugh_nagumo");
  auto q = lyap::build_quadratic_flow(fn, Vec::Zero(3));
  Grid coarse(IntervalVector(3, Interval(-0.5, 0.5)), {6, 6, 6});
  int checked = 0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    IntervalVector cell = coarse.cell(i);
    if (!lyap::stage1_flow(fn, q, cell)) continue;
    Grid fine(cell, {2, 2, 2});
    for (std::size_t j = 0; j < fine.size(); ++j) CHECK(lyap::stage1_flow(fn, q, fine.cell(j)));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("ray-certified cells decrease pointwise") {
  gen::Gen g(61);
  auto fn = named("fitzhugh_nagumo");
  auto z = lyap::verify_zero(fn, Vec::Zero(3));
  auto q = lyap::build_quadratic_flow(fn, z.enclosure.mid());
  q.center_box = z.enclosure;
  Grid grid(IntervalVector(3, Interval(-0.5, 0.5)), {20, 20, 20});
  auto r = lyap::sweep_flow(fn, q, grid, {1});
  int sampled = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!r.ray_stage1[i]) continue;
    CHECK(r.cells[i].stage1);
    for (int s = 0; s < 5; ++s) {
      Vec x = g.member(grid.cell(i));
      if (x.norm() < 1e-6) continue;
      CHECK(2 * x.dot(q.y * fn(x)) < 0);
      ++sampled;
    }
  }
  CHECK(sampled > 0);
}

TEST_CASE("equal weights leave verdicts unchanged") {
  auto fn = named("fitzhugh_nagumo");
  Grid grid(IntervalVector(3, Interval(-0.5, 0.5)), {6, 6, 6});
  auto q1 = lyap::build_quadratic_flow(fn, Vec::Zero(3));
  auto q5 = lyap::build_quadratic_flow(fn, Vec::Zero(3), {{5, 5, 5}});
  auto r1 = lyap::sweep_flow(fn, q1, grid, {1});
  auto r5 = lyap::sweep_flow(fn, q5, grid, {1});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(r1.cells[i].stage1 == r5.cells[i].stage1);
    CHECK(r1.cells[i].stage2 == r5.cells[i].stage2);
  }
}

TEST_CASE("sweep is independent of the worker count") {
  auto fn = named("fitzhugh_nagumo");
  Grid grid(IntervalVector(3, Interval(-0.5, 0.5)), {5, 5, 5});
  auto q = lyap::build_quadratic_flow(fn, Vec::Zero(3));
  auto a = lyap::sweep_flow(fn, q, grid, {1});
  auto b = lyap::sweep_flow(fn, q, grid, {4});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(a.cells[i].color() == b.cells[i].color());
    CHECK(a.certified[i] == b.certified[i]);
  }
}

TEST_CASE("lyapunov tracing") {
  auto d = decay();
  auto qd = lyap::build_quadratic_flow(d, Vec::Zero(1));
  auto t = lyap::lyapunov_trace(d, qd, Vec::Constant(1, 1.0), 0.25);
  CHECK(t.endpoint[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(t.time == doctest::Approx(std::log(2.0)).epsilon(1e-10));

  auto f = linear(-1, -2);
  auto q = lyap::build_quadratic_flow(f, Vec::Zero(2));
  Vec x0 = vec({1, 1});
  const double target = 0.5;
  auto tr = lyap::lyapunov_trace(f, q, x0, target);
  // x = e^-t, y = e^-2t; with s = e^-2t, L = s + s^2.
  double s = (-1 + std::sqrt(1 + 4 * target)) / 2;
  CHECK(std::abs(tr.endpoint[0] - std::sqrt(s)) < 1e-10);
  CHECK(std::abs(tr.endpoint[1] - s) < 1e-10);
  CHECK(tr.crosscheck_error < 1e-8);
  for (std::size_t i = 1; i < tr.levels.size(); ++i) CHECK(tr.levels[i] < tr.levels[i - 1]);

  auto same = lyap::lyapunov_trace(f, q, x0, q.value(x0));
  CHECK(same.endpoint == x0);

  CHECK_THROWS_AS(lyap::lyapunov_trace(f, q, Vec::Zero(2), 0.5), lyap::Error);
}
