#include <cmath>

#include "doctest.h"
#include "gen.hpp"
#include "lyap/errors.hpp"
#include "lyap/systems.hpp"

using lyap::Expr;
using lyap::Interval;
using lyap::IntervalVector;
using lyap::Mat;
using lyap::Vec;
using lyap::VectorField;

namespace {

VectorField named(const std::string& name) { return lyap::builtin(name, lyap::default_parameters(name)); }

VectorField decay() { return VectorField("decay", {"x"}, {-Expr::var(0)}); }
VectorField riccati() { return VectorField("riccati", {"x"}, {sqr(Expr::var(0))}); }

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

}  // namespace

TEST_CASE("fitzhugh-nagumo vanishes at the origin") {
  auto f = named("fitzhugh_nagumo");
  CHECK(f(Vec::Zero(3)) == Vec::Zero(3));
  auto box = f(IntervalVector::point(Vec::Zero(3)));
  for (const auto& c : box) CHECK(c == Interval(0));
}

TEST_CASE("fitzhugh-nagumo components against a hand-written formula") {
  auto f = named("fitzhugh_nagumo");
  gen::Gen g(37);
  for (int i = 0; i < 100; ++i) {
    Vec x = g.vec(3, -2, 2);
    double u = x[0], v = x[1], w = x[2];
    double fu = u * (u - 0.2) * (1 - u);
    Vec want = v3(v, (5 * v - fu + w) / 5, 0.15 / 5 * (u - 20 * w));
    CHECK((f(x) - want).cwiseAbs().maxCoeff() <= 1e-14 * (1 + want.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("linear field has constant Jacobian") {
  auto f = lyap::builtin("linear_diag", {{"lambda1", -1}, {"lambda2", 2}});
  Mat want(2, 2);
  want << -1, 0, 0, 2;
  IntervalVector box{Interval(-3, 5), Interval(-1e3, 7)};
  CHECK(lyap::eval_Df(f, box) == lyap::IntervalMatrix::point(want));
  Vec x(2);
  x << 0.5, 0.25;
  CHECK(f(x) == Vec((Vec(2) << -0.5, 0.5).finished()));
}

TEST_CASE("cubic at one half") {
  auto f = named("cubic_1d");
  IntervalVector x{Interval(0.5)};
  CHECK(lyap::eval_f(f, x)[0] == Interval(0.375));
  CHECK(lyap::eval_Df(f, x)(0, 0) == Interval(0.25));
}

TEST_CASE("taylor coefficients of simple solutions") {
  auto c = lyap::taylor_coeffs(decay(), IntervalVector{Interval(1)}, 5);
  REQUIRE(c.size() == 6);
  double fact = 1;
  for (int k = 0; k <= 5; ++k) {
    if (k > 0) fact *= k;
    CHECK(c[k][0].contains((k % 2 ? -1.0 : 1.0) / fact));
    CHECK(c[k][0].width() <= 1e-15);
  }

  auto r = lyap::taylor_coeffs(riccati(), IntervalVector{Interval(1)}, 6);
  for (const auto& ck : r) CHECK(ck[0] == Interval(1));

  Vec x0(2);
  x0 << 1, 0;
  auto h = lyap::taylor_coeffs(named("harmonic_oscillator"), x0, 4);
  const double cosine[] = {1, 0, -0.5, 0, 1.0 / 24};
  for (int k = 0; k <= 4; ++k) CHECK(h[k][0] == doctest::Approx(cosine[k]).epsilon(1e-15));
}

TEST_CASE("builtin catalogue") {
  auto lin = lyap::builtin("linear_diag", {{"lambda1", -1}, {"lambda2", 2}});
  CHECK(lin.dimension() == 2);

  auto lz = lyap::builtin("lorenz_sinai_vul", {{"a1", 9.700378782}, {"a2", -16.700378782}, {"a3", 2.666666667},
                                               {"b1", -0.227266206}, {"b2", 2.616729797}, {"b3", -1.783396463}});
  Vec x = v3(1.5, -0.5, 2);
  double s = x[0] + x[1];
  Vec want = v3(9.700378782 * 1.5 - 0.227266206 * s * 2, -16.700378782 * -0.5 + 0.227266206 * s * 2,
                -2.666666667 * 2 + s * (2.616729797 * 1.5 - 1.783396463 * -0.5));
  CHECK((lz(x) - want).cwiseAbs().maxCoeff() < 1e-13);

  // Printed sign of the second Rossler equation versus the usual one.
  Vec y = v3(1, 2, 3);
  CHECK(named("rossler")(y)[1] == doctest::Approx(1 + 0.2 * 2));
  CHECK(named("rossler_printed")(y)[1] == doctest::Approx(-1 - 0.2 * 2));

  CHECK_THROWS_AS(lyap::builtin("no_such_system", {}), lyap::UsageError);
  CHECK_THROWS_AS(lyap::builtin("fitzhugh_nagumo", {{"a", 0.2}}), lyap::UsageError);
  CHECK_THROWS_AS(lyap::builtin("linear_diag", {}), lyap::UsageError);
}

TEST_CASE("division by an interval containing zero") {
  VectorField inv("inverse", {"x"}, {Expr(1.0) / Expr::var(0)});
  CHECK_THROWS_AS(lyap::eval_f(inv, IntervalVector{Interval(-1, 1)}), lyap::DomainError);
  CHECK(lyap::eval_f(inv, IntervalVector{Interval(2, 4)})[0] == Interval(0.25, 0.5));
}

TEST_CASE("dimension mismatch") {
  CHECK_THROWS_AS(lyap::eval_f(named("cubic_1d"), IntervalVector(2)), lyap::UsageError);
}

TEST_CASE("jacobian agrees with central differences") {
  gen::Gen g(41);
  for (const std::string name : {"fitzhugh_nagumo", "rossler", "lorenz_sinai_vul", "planar_limit_cycle"}) {
    auto f = named(name);
    for (int trial = 0; trial < 20; ++trial) {
      Vec x = g.vec(f.dimension(), -2, 2);
      Mat j = f.jacobian(x);
      for (std::size_t k = 0; k < f.dimension(); ++k) {
        double h = 1e-5;
        Vec xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        Vec fd = (f(xp) - f(xm)) / (2 * h);
        CHECK((fd - j.col(k)).cwiseAbs().maxCoeff() <= 1e-6 * (1 + j.cwiseAbs().maxCoeff()));
      }
    }
  }
}

TEST_CASE("first taylor coefficient is the field; point boxes contain float values") {
  gen::Gen g(43);
  for (const std::string name : {"fitzhugh_nagumo", "rossler", "lorenz_sinai_vul", "cubic_1d", "planar_limit_cycle"}) {
    auto f = named(name);
    for (int trial = 0; trial < 20; ++trial) {
      Vec x = g.vec(f.dimension(), -3, 3);
      auto c = lyap::taylor_coeffs(f, IntervalVector::point(x), 3);
      auto fx = lyap::eval_f(f, IntervalVector::point(x));
      CHECK(c[1] == fx);
      CHECK(fx.contains(Vec(f(x))));
      CHECK(lyap::eval_Df(f, IntervalVector::point(x)).contains(f.jacobian(x)));
    }
  }
}

TEST_CASE("interval evaluation encloses sampled points") {
  gen::Gen g(47);
  auto f = named("fitzhugh_nagumo");
  for (int trial = 0; trial < 50; ++trial) {
    Vec lo = g.vec(3, -1, 1);
    IntervalVector box = IntervalVector::from_bounds(lo, lo + g.vec(3, 0, 0.2));
    auto fb = lyap::eval_f(f, box);
    auto jb = lyap::eval_Df(f, box);
    for (int s = 0; s < 20; ++s) {
      Vec z = g.member(box);
      CHECK(fb.contains(Vec(f(z))));
      CHECK(jb.contains(f.jacobian(z)));
    }
  }
}

TEST_CASE("builtin maps") {
  auto sq = lyap::builtin_map("square_1d", {});
  CHECK(sq(Vec::Constant(1, 0.5))[0] == 0.25);
  auto lin = lyap::builtin_map("linear_diag_map", {{"mu1", 0.5}, {"mu2", 2}});
  Vec x(2);
  x << 1, 1;
  CHECK(lin(x) == Vec((Vec(2) << 0.5, 2).finished()));
}
