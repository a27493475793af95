#include "lyap/odeint.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "lyap/linalg.hpp"
#include "lyap/tape.hpp"

namespace lyap {

void IntegratorConfig::validate() const {
  if (taylor_order < 2) throw UsageError("taylor_order must be >= 2");
  if (steps < 1) throw UsageError("steps must be >= 1");
  if (!(inflation > 1.0)) throw UsageError("inflation must be > 1");
  if (max_retries < 1) throw UsageError("max_retries must be >= 1");
  if (!(divergence_bound > 0.0)) throw UsageError("divergence_bound must be positive");
}

namespace {

IntervalVector horner(const std::vector<IntervalVector>& c, const Interval& t) {
  IntervalVector r = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) r = c[k] + t * r;
  return r;
}

IntervalMatrix horner(const std::vector<IntervalMatrix>& c, const Interval& t) {
  IntervalMatrix r = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) r = c[k] + t * r;
  return r;
}

}  // namespace

IntervalVector StepRecord::eval(const Interval& tau) const {
  if (tau.lo() < 0.0 || tau.hi() > h) throw UsageError("StepRecord::eval: local time outside the step");
  const int p = static_cast<int>(center_coeffs.size()) - 1;
  IntervalVector y = horner(center_coeffs, tau) + pow(tau, p + 1) * remainder_coeff;
  IntervalMatrix j = horner(jac_coeffs, tau);
  IntervalVector x = y + mat_vec(mat_mul(j, frame), r);
  auto cut = intersect(x, apriori);
  return cut ? *cut : x;
}

LohnerSolver::LohnerSolver(const VectorField& field, const IntervalVector& x0,
                           const IntegratorConfig& cfg)
    : field_(field), cfg_(cfg), n_(field.dimension()) {
  cfg_.validate();
  if (x0.size() != n_) throw UsageError("LohnerSolver: initial box has wrong dimension");
  center_ = x0.mid();
  frame_ = Mat::Identity(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  r_ = x0 - center_;
  t_ = Interval(0.0);
}

IntervalVector LohnerSolver::enclosure() const { return mat_vec(frame_, r_) + center_; }

IntervalVector LohnerSolver::apriori(const IntervalVector& x, double h) const {
  const Interval T(0.0, h);
  IntervalVector w = x + T * field_(x);
  for (int it = 0; it < cfg_.max_retries; ++it) {
    IntervalVector trial(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      double grow = rounding::mul_up(w[i].rad(), cfg_.inflation - 1.0);
      double floor = 1e-14 * (1.0 + std::fabs(w[i].mid()));
      trial[i] = inflate(w[i], std::max(grow, floor));
    }
    IntervalVector z;
    try {
      z = x + T * field_(trial);
    } catch (const DomainError&) {
      break;  // the trial set grew past the representable range
    }
    if (trial.contains(z)) return z;
    w = 2 * it < cfg_.max_retries ? z : hull(z, trial);
  }
  throw IntegrationError(IntegrationError::Kind::StepFailure, t_.mid(),
                         fmt::format("a-priori enclosure not found at t = {} (h = {})", t_.mid(), h));
}

StepRecord LohnerSolver::step(const Interval& tau) {
  if (tau.lo() < 0.0 || !(tau.hi() > 0.0)) throw UsageError("LohnerSolver::step: invalid step");
  const double h = tau.hi();
  const int p = cfg_.taylor_order;
  const std::size_t n = n_;

  IntervalVector x = enclosure();
  if (norm_inf(x) > cfg_.divergence_bound)
    throw IntegrationError(IntegrationError::Kind::Divergence, t_.mid(),
                           fmt::format("enclosure exceeds {} at t = {}", cfg_.divergence_bound, t_.mid()));

  IntervalVector w = apriori(x, h);

  // Taylor coefficients of the solution and of Df along it, over the box.
  TaylorEvaluator<Interval> box(field_.tape_with_jacobian(), p);
  std::vector<IntervalVector> cx(static_cast<std::size_t>(p) + 1, IntervalVector(n));
  std::vector<IntervalMatrix> df(static_cast<std::size_t>(p), IntervalMatrix(n, n));
  for (std::size_t i = 0; i < n; ++i) {
    cx[0][i] = x[i];
    box.set_var(i, 0, x[i]);
  }
  for (int k = 0; k < p; ++k) {
    box.compute(k);
    const Interval div(static_cast<double>(k + 1));
    for (std::size_t i = 0; i < n; ++i) {
      cx[k + 1][i] = box.output(i, k) / div;
      box.set_var(i, k + 1, cx[k + 1][i]);
      for (std::size_t j = 0; j < n; ++j) df[k](i, j) = box.output(n + i * n + j, k);
    }
  }
  std::vector<IntervalMatrix> v(static_cast<std::size_t>(p) + 1);
  v[0] = IntervalMatrix::identity(n);
  for (int k = 0; k < p; ++k) {
    IntervalMatrix s = df[k];  // Df_k * V_0 with V_0 = I
    for (int j = 0; j < k; ++j) s = s + mat_mul(df[j], v[k - j]);
    v[k + 1] = Interval(1.0) / Interval(static_cast<double>(k + 1)) * s;
  }

  // Remainder coefficient over the a-priori set.
  TaylorEvaluator<Interval> rem(field_.tape(), p + 1);
  IntervalVector wc(n);
  for (std::size_t i = 0; i < n; ++i) rem.set_var(i, 0, w[i]);
  for (int k = 0; k <= p; ++k) {
    rem.compute(k);
    const Interval div(static_cast<double>(k + 1));
    for (std::size_t i = 0; i < n; ++i) {
      Interval c = rem.output(i, k) / div;
      if (k < p) rem.set_var(i, k + 1, c);
      else wc[i] = c;
    }
  }
  const Interval T(0.0, h);
  IntervalVector refined = horner(cx, T) + pow(T, p + 1) * wc;
  if (auto cut = intersect(w, refined)) w = *cut;

  // Taylor polynomial at the center.
  TaylorEvaluator<Interval> cen(field_.tape(), p);
  std::vector<IntervalVector> cc(static_cast<std::size_t>(p) + 1, IntervalVector(n));
  for (std::size_t i = 0; i < n; ++i) {
    cc[0][i] = Interval(center_(static_cast<Eigen::Index>(i)));
    cen.set_var(i, 0, cc[0][i]);
  }
  for (int k = 0; k < p; ++k) {
    cen.compute(k);
    const Interval div(static_cast<double>(k + 1));
    for (std::size_t i = 0; i < n; ++i) {
      cc[k + 1][i] = cen.output(i, k) / div;
      cen.set_var(i, k + 1, cc[k + 1][i]);
    }
  }

  StepRecord rec;
  rec.t0 = t_;
  rec.h = h;
  rec.apriori = w;
  rec.center_coeffs = cc;
  rec.jac_coeffs = v;
  rec.remainder_coeff = wc;
  rec.frame = frame_;
  rec.r = r_;

  // Advance the set.
  IntervalVector y = horner(cc, tau) + pow(tau, p + 1) * wc;
  IntervalMatrix a = mat_mul(horner(v, tau), frame_);
  Vec new_center = y.mid();
  IntervalVector err = y - new_center;

  Mat am = a.mid();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> weight(n);
  for (std::size_t j = 0; j < n; ++j)
    weight[j] = am.col(static_cast<Eigen::Index>(j)).norm() * std::max(r_[j].width(), 1e-300);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return weight[i] > weight[j]; });
  Mat permuted(am.rows(), am.cols());
  for (std::size_t j = 0; j < n; ++j) permuted.col(static_cast<Eigen::Index>(j)) = am.col(order[j]);
  Eigen::HouseholderQR<Mat> qr(permuted);
  Mat q = qr.householderQ();
  IntervalMatrix qinv = enclose_inverse(q);

  r_ = mat_vec(mat_mul(qinv, a), r_) + mat_vec(qinv, err);
  center_ = new_center;
  frame_ = q;
  t_ = t_ + tau;
  return rec;
}

IntervalVector variational_initial(const IntervalVector& x0) {
  const std::size_t n = x0.size();
  IntervalVector z(n + n * n);
  for (std::size_t i = 0; i < n; ++i) z[i] = x0[i];
  for (std::size_t i = 0; i < n; ++i) z[n + i * n + i] = Interval(1.0);
  return z;
}

void split_variational(const IntervalVector& xv, std::size_t n, IntervalVector& x, IntervalMatrix& v) {
  if (xv.size() != n + n * n) throw UsageError("split_variational: wrong size");
  x = xv.segment(0, n);
  v = IntervalMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) v(i, j) = xv[n + i * n + j];
}

FlowEnclosure integrate_range(const VectorField& field, const IntervalVector& x0,
                              const Interval& window, const IntegratorConfig& cfg,
                              IntegrationMode mode) {
  cfg.validate();
  if (window.lo() < 0.0 || !(window.hi() > 0.0))
    throw UsageError("integrate_range: window must lie in (0, inf)");
  if (x0.size() != field.dimension()) throw UsageError("integrate_range: dimension mismatch");
  const bool c1 = mode == IntegrationMode::C1;
  VectorField fld = c1 ? field.variational() : field;
  LohnerSolver solver(fld, c1 ? variational_initial(x0) : x0, cfg);

  const double a = window.lo(), b = window.hi();
  double h = b / cfg.steps;
  const double h_min = h * std::ldexp(1.0, -cfg.max_retries);
  std::optional<IntervalVector> acc;
  for (;;) {
    const Interval t = solver.time();
    const double remaining = rounding::sub_up(b, t.lo());
    const bool last = remaining <= h * (1.0 + 1e-9);
    Interval tau(h);
    if (last) {
      Interval d = Interval(b) - t;
      tau = Interval(std::max(0.0, d.lo()), d.hi());
    }
    StepRecord rec;
    try {
      rec = solver.step(tau);
    } catch (const IntegrationError& e) {
      if (!cfg.adaptive || e.kind() != IntegrationError::Kind::StepFailure || h / 2 < h_min) throw;
      h /= 2;
      continue;
    }
    double lo = std::max(0.0, rounding::sub_down(a, rec.t0.hi()));
    double hi = std::min(rec.h, rounding::sub_up(b, rec.t0.lo()));
    if (lo <= hi) {
      IntervalVector e = rec.eval(Interval(lo, hi));
      acc = acc ? hull(*acc, e) : e;
    }
    if (last) break;
  }

  FlowEnclosure out;
  out.time = window;
  if (c1) {
    IntervalVector x;
    IntervalMatrix v;
    split_variational(*acc, field.dimension(), x, v);
    out.state = x;
    out.variational = v;
  } else {
    out.state = *acc;
  }
  return out;
}

FlowEnclosure integrate(const VectorField& field, const IntervalVector& x0, double t_end,
                        const IntegratorConfig& cfg, IntegrationMode mode) {
  if (!(t_end > 0.0)) throw UsageError("integrate: t_end must be positive");
  return integrate_range(field, x0, Interval(t_end), cfg, mode);
}

}  // namespace lyap
