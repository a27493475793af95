#include "lyap/krawczyk.hpp"

#include <fmt/format.h>

#include "lyap/linalg.hpp"

namespace lyap {

IntervalVector interval_gauss(const IntervalMatrix& a0, const IntervalVector& b0) {
  const std::size_t n = a0.rows();
  if (a0.cols() != n || b0.size() != n) throw UsageError("interval_gauss: shape mismatch");
  IntervalMatrix a = a0;
  IntervalVector b = b0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (a(i, k).mig() > a(piv, k).mig()) piv = i;
    if (a(piv, k).contains_zero()) throw NumericalError("interval_gauss: pivot contains zero");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      Interval m = a(i, k) / a(k, k);
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
      b[i] -= m * b[k];
    }
  }
  IntervalVector x(n);
  for (std::size_t k = n; k-- > 0;) {
    Interval s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

KrawczykResult krawczyk_verify(const BoxFunction& f, const BoxJacobian& df, const Vec& seed,
                               const Mat& r, const KrawczykOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(seed.size());
  KrawczykResult res;
  IntervalVector z(n);
  for (std::size_t i = 0; i < n; ++i)
    z[i] = inflate(Interval(seed(static_cast<Eigen::Index>(i))), opts.initial_radius);
  IntervalMatrix ri = IntervalMatrix::point(r);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    res.iterations = it;
    res.enclosure = z;
    Vec zm = z.mid();
    IntervalVector fz = f(IntervalVector::point(zm));
    IntervalMatrix dfz = df(z);
    IntervalVector k;
    try {
      if (opts.plain_newton) {
        IntervalVector step = interval_gauss(mat_mul(ri, dfz), mat_vec(ri, fz));
        k = IntervalVector::point(zm) - step;
      } else {
        IntervalMatrix c = IntervalMatrix::identity(n) - mat_mul(ri, dfz);
        k = IntervalVector::point(zm) - mat_vec(ri, fz) + mat_vec(c, z - zm);
      }
    } catch (const NumericalError& e) {
      res.message = e.what();
      return res;
    }
    if (z.interior_contains(k)) {
      res.verified = true;
      res.enclosure = k;
      res.message = fmt::format("inclusion after {} iteration(s)", it);
      return res;
    }
    IntervalVector next(n);
    for (std::size_t i = 0; i < n; ++i)
      next[i] = Interval(1.0 + opts.epsilon) * k[i] - Interval(opts.epsilon) * k[i];
    z = next;
  }
  res.message = fmt::format("no inclusion after {} iterations", opts.max_iterations);
  return res;
}

Vec newton_refine(const ExprSystem& f, const Vec& seed, int max_steps, double tol) {
  Vec x = seed;
  for (int i = 0; i < max_steps; ++i) {
    Vec fx = f(x);
    Mat j = f.jacobian(x);
    Vec dx = j.partialPivLu().solve(fx);
    if (!dx.allFinite()) break;
    x -= dx;
    if (dx.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, x.lpNorm<Eigen::Infinity>())) break;
  }
  return x;
}

KrawczykResult verify_zero(const ExprSystem& f, const Vec& seed, const KrawczykOptions& opts) {
  Vec x = newton_refine(f, seed);
  Mat j = f.jacobian(x);
  ApproxInverse inv = approx_inverse(j);
  return krawczyk_verify([&](const IntervalVector& z) { return f(z); },
                         [&](const IntervalVector& z) { return f.jacobian(z); }, x, inv.inverse,
                         opts);
}

}  // namespace lyap
