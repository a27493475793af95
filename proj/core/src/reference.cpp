#include "lyap/reference.hpp"

#include <cmath>

#include "lyap/tape.hpp"

namespace lyap {

namespace {

// One Taylor step of size h (sign included); returns the accepted size.
double taylor_step(const VectorField& f, TaylorEvaluator<double>& ev, Vec& x, double remaining,
                   const ReferenceOptions& opts) {
  const std::size_t n = f.dimension();
  const int p = opts.order;
  std::vector<Vec> c(static_cast<std::size_t>(p) + 1, Vec(n));
  c[0] = x;
  for (std::size_t i = 0; i < n; ++i) ev.set_var(i, 0, x(i));
  for (int k = 0; k < p; ++k) {
    ev.compute(k);
    for (std::size_t i = 0; i < n; ++i) {
      c[k + 1](i) = ev.output(i, k) / (k + 1);
      ev.set_var(i, k + 1, c[k + 1](i));
    }
  }
  double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
  double rho = INFINITY;
  for (int j : {p - 1, p}) {
    double m = c[j].lpNorm<Eigen::Infinity>() / scale;
    if (m > 0) rho = std::min(rho, std::pow(m, -1.0 / j));
  }
  double h = std::min({opts.safety * rho, opts.max_step, std::fabs(remaining)});
  if (remaining < 0) h = -h;
  Vec y = c[p];
  for (int k = p - 1; k >= 0; --k) y = c[k] + h * y;
  if (!y.allFinite()) throw NumericalError("reference integration diverged");
  x = y;
  return h;
}

}  // namespace

Trajectory reference_trajectory(const VectorField& f, const Vec& x0, double t_end,
                                const ReferenceOptions& opts) {
  if (static_cast<std::size_t>(x0.size()) != f.dimension())
    throw UsageError("reference_trajectory: dimension mismatch");
  TaylorEvaluator<double> ev(f.tape(), opts.order);
  Trajectory tr;
  tr.t.push_back(0.0);
  tr.x.push_back(x0);
  Vec x = x0;
  double t = 0.0;
  std::size_t guard = 0;
  while (t != t_end) {
    double h = taylor_step(f, ev, x, t_end - t, opts);
    if (h == 0.0 || ++guard > 100000000) throw NumericalError("reference integration stalled");
    t = (std::fabs(t_end - t - h) <= 4e-16 * std::fabs(t_end)) ? t_end : t + h;
    tr.t.push_back(t);
    tr.x.push_back(x);
  }
  return tr;
}

Vec reference_flow(const VectorField& f, const Vec& x0, double t, const ReferenceOptions& opts) {
  if (t == 0.0) return x0;
  return reference_trajectory(f, x0, t, opts).x.back();
}

void reference_flow_c1(const VectorField& f, const Vec& x0, double t, Vec& x, Mat& v,
                       const ReferenceOptions& opts) {
  const Eigen::Index n = x0.size();
  Vec z(n + n * n);
  z.head(n) = x0;
  z.tail(n * n).setZero();
  for (Eigen::Index i = 0; i < n; ++i) z(n + i * n + i) = 1.0;
  Vec out = reference_flow(f.variational(), z, t, opts);
  x = out.head(n);
  v.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) v(i, j) = out(n + i * n + j);
}

}  // namespace lyap
