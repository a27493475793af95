#include "lyap/lyapunov_flow.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "lyap/parallel.hpp"
#include "lyap/reference.hpp"

namespace lyap {

std::vector<double> MWeights::resolve(std::size_t n) const {
  if (m.empty()) return std::vector<double>(n, 1.0);
  if (m.size() != n) throw UsageError(fmt::format("m-weights: expected {} entries, got {}", n, m.size()));
  for (double w : m)
    if (!(w > 0.0) || !std::isfinite(w)) throw UsageError("m-weights must be positive and finite");
  return m;
}

double QuadraticForm::value(const Vec& x) const {
  Vec d = x - center;
  return d.dot(y * d);
}

Interval QuadraticForm::value(const IntervalVector& x) const { return quad_form(x - center_box, y); }

QuadraticForm quadratic_from_spectrum(const SpectralData& s, const Vec& center, const MWeights& m) {
  const std::size_t n = static_cast<std::size_t>(s.eigenvalues.size());
  if (s.signs.size() != n) throw UsageError("quadratic form: spectral signs not set");
  if (static_cast<std::size_t>(center.size()) != n) throw UsageError("quadratic form: center dimension mismatch");
  std::vector<double> w = m.resolve(n);
  CVec diag(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) diag(static_cast<Eigen::Index>(j)) = static_cast<double>(s.signs[j]) * w[j];
  CMat yc = s.inverse.adjoint() * diag.asDiagonal() * s.inverse;

  QuadraticForm q;
  q.center = center;
  q.center_box = IntervalVector::point(center);
  q.spectrum = s;
  q.imag_residual = yc.imag().cwiseAbs().maxCoeff();
  q.y = yc.real();
  for (Eigen::Index i = 0; i < q.y.rows(); ++i)
    for (Eigen::Index j = i + 1; j < q.y.cols(); ++j) {
      double v = 0.5 * (q.y(i, j) + q.y(j, i));
      q.y(i, j) = v;
      q.y(j, i) = v;
    }

  Eigen::SelfAdjointEigenSolver<Mat> es(q.y, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > 0) ++q.positive;
    if (es.eigenvalues()(i) < 0) ++q.negative;
  }
  int stable = static_cast<int>(std::count(s.signs.begin(), s.signs.end(), 1));
  if (q.positive != stable || q.negative != static_cast<int>(n) - stable)
    throw NumericalError(fmt::format("quadratic form: signature ({}, {}) does not match the spectral split ({}, {})",
                                     q.positive, q.negative, stable, static_cast<int>(n) - stable));
  return q;
}

QuadraticForm build_quadratic_flow(const VectorField& f, const Vec& center, const MWeights& m) {
  SpectralData s = eig_decompose(f.jacobian(center));
  s.signs = flow_signs(s.eigenvalues);
  return quadratic_from_spectrum(s, center, m);
}

namespace {

// A = J^T Y + Y J, assembled from B = Y J so that A is exactly symmetric.
IntervalMatrix lyapunov_matrix(const Mat& y, const IntervalMatrix& j) {
  IntervalMatrix b = mat_mul(y, j);
  const std::size_t n = b.rows();
  IntervalMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i; k < n; ++k) {
      Interval v = b(i, k) + b(k, i);
      a(i, k) = v;
      a(k, i) = v;
    }
  return a;
}

}  // namespace

bool stage1_flow(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell, NegDefMethod method) {
  try {
    return verify_negdef(lyapunov_matrix(q.y, f.jacobian(cell)), method);
  } catch (const DomainError&) {
    return false;
  } catch (const NumericalError&) {
    return false;
  }
}

Interval lyapunov_derivative(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell) {
  IntervalVector d = cell - q.center_box;
  Interval naive = Interval(2.0) * dot(d, mat_vec(q.y, f(cell)));

  // g(m) + grad g(cell) . (cell - m), grad g = 2 Y f + 2 Df^T Y (x - x*)
  Vec m = cell.mid();
  IntervalVector pm = IntervalVector::point(m);
  IntervalVector dm = pm - q.center_box;
  Interval gm = Interval(2.0) * dot(dm, mat_vec(q.y, f(pm)));
  IntervalVector yf = mat_vec(q.y, f(cell));
  IntervalVector yd = mat_vec(q.y, d);
  IntervalMatrix jt = f.jacobian(cell).transpose();
  IntervalVector grad = Interval(2.0) * (yf + mat_vec(jt, yd));
  Interval mv = gm + dot(grad, cell - m);

  auto both = intersect(naive, mv);
  return both ? *both : naive;
}

bool stage2_flow(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell) {
  try {
    return lyapunov_derivative(f, q, cell).hi() < 0.0;
  } catch (const DomainError&) {
    return false;
  }
}

std::size_t SweepResult::count(Color c) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [c](const CellVerdict& v) { return v.color() == c; }));
}

std::size_t SweepResult::certified_count() const {
  return static_cast<std::size_t>(std::count(certified.begin(), certified.end(), true));
}

namespace {

constexpr std::size_t kMaxRayPieces = 4096;

bool ray_ok(const Grid& grid, const std::vector<CellVerdict>& cells, const IntervalVector& center,
            std::size_t index) {
  const std::size_t n = grid.dimension();
  IntervalVector c = grid.cell(index);
  IntervalVector diff = c - center;
  double rel = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    double w = grid.boundary(a, 1) - grid.boundary(a, 0);
    rel = std::max(rel, diff[a].mag() / w);
  }
  std::size_t pieces = static_cast<std::size_t>(std::ceil(2.0 * rel)) + 1;
  pieces = std::min(pieces, kMaxRayPieces);

  // (1 - s) c + s x is linear in s, so each bound sits at a piece end.
  auto point_on = [&](std::size_t k, std::size_t a, bool upper) {
    const Interval s = Interval(static_cast<double>(k)) / Interval(static_cast<double>(pieces));
    const double cb = upper ? center[a].hi() : center[a].lo();
    const double xb = upper ? c[a].hi() : c[a].lo();
    Interval v = (Interval(1.0) - s) * Interval(cb) + s * Interval(xb);
    if (k == 0) v = Interval(cb);
    if (k == pieces) v = Interval(xb);
    return upper ? v.hi() : v.lo();
  };

  std::vector<std::size_t> lo, hi, multi(n);
  for (std::size_t k = 0; k < pieces; ++k) {
    IntervalVector box(n);
    for (std::size_t a = 0; a < n; ++a)
      box[a] = Interval(std::min(point_on(k, a, false), point_on(k + 1, a, false)),
                        std::max(point_on(k, a, true), point_on(k + 1, a, true)));
    if (!grid.cells_covering(box, lo, hi)) return false;
    multi = lo;
    for (;;) {
      if (!cells[grid.flat_index(multi)].stage1) return false;
      std::size_t a = 0;
      while (a < n && multi[a] == hi[a]) {
        multi[a] = lo[a];
        ++a;
      }
      if (a == n) break;
      ++multi[a];
    }
  }
  return true;
}

}  // namespace

std::vector<bool> ray_certify(const Grid& grid, const std::vector<CellVerdict>& cells, const IntervalVector& center,
                              unsigned threads) {
  if (cells.size() != grid.size()) throw UsageError("ray_certify: verdict count does not match the grid");
  if (center.size() != grid.dimension()) throw UsageError("ray_certify: center dimension mismatch");
  std::vector<char> ok(grid.size(), 0);
  if (grid.bounds().contains(center)) {
    parallel_for(grid.size(), threads, [&](std::size_t i) {
      if (cells[i].stage1) ok[i] = ray_ok(grid, cells, center, i) ? 1 : 0;
    });
  }
  return std::vector<bool>(ok.begin(), ok.end());
}

SweepResult sweep_flow(const VectorField& f, const QuadraticForm& q, const Grid& grid, const SweepOptions& opts) {
  if (grid.dimension() != f.dimension()) throw UsageError("sweep_flow: grid dimension mismatch");
  SweepResult res;
  res.grid = grid;
  res.center = q.center_box;
  res.cells.resize(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    IntervalVector cell = grid.cell(i);
    CellVerdict& v = res.cells[i];
    v.index = i;
    v.stage1 = stage1_flow(f, q, cell, opts.method);
    v.stage2 = stage2_flow(f, q, cell);
  });
  if (opts.ray_certify)
    res.ray_stage1 = ray_certify(grid, res.cells, q.center_box, opts.threads);
  else
    res.ray_stage1.assign(grid.size(), false);
  res.certified.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) res.certified[i] = res.cells[i].stage2 || res.ray_stage1[i];
  return res;
}

bool hyperbolicity_check(const VectorField& f, const IntervalVector& center, const IntervalVector& domain) {
  const std::size_t n = f.dimension();
  if (center.size() != n || domain.size() != n) throw UsageError("hyperbolicity_check: dimension mismatch");
  SpectralData s = eig_decompose(f.jacobian(center.mid()));
  flow_signs(s.eigenvalues);
  ComplexIntervalMatrix xi;
  IntervalMatrix df;
  try {
    xi = enclose_inverse(s.vectors);
    df = f.jacobian(domain);
  } catch (const NumericalError&) {
    return false;
  } catch (const DomainError&) {
    return false;
  }
  Mat xr = s.vectors.real(), xim = s.vectors.imag();
  IntervalMatrix ra = mat_mul(xi.re, df), ia = mat_mul(xi.im, df);
  IntervalMatrix vre = mat_mul(ra, xr) - mat_mul(ia, xim);
  IntervalMatrix vim = mat_mul(ra, xim) + mat_mul(ia, xr);
  for (std::size_t i = 0; i < n; ++i) {
    const auto lam = s.eigenvalues(static_cast<Eigen::Index>(i));
    vre(i, i) -= Interval(lam.real());
    vim(i, i) -= Interval(lam.imag());
  }
  auto mag = [&](std::size_t i, std::size_t j) { return sqrt(sqr(vre(i, j)) + sqr(vim(i, j))); };
  for (std::size_t i = 0; i < n; ++i) {
    double re = std::abs(s.eigenvalues(static_cast<Eigen::Index>(i)).real());
    Interval row(0.0), col(0.0);
    for (std::size_t j = 0; j < n; ++j) {
      row += mag(i, j);
      col += mag(j, i);
    }
    if (!(row.hi() < re) || !(col.hi() < re)) return false;
  }
  return true;
}

UniquenessCertificate unique_equilibrium_report(const SweepResult& sweep, const KrawczykResult& equilibrium) {
  UniquenessCertificate cert;
  cert.enclosure = equilibrium.enclosure;
  cert.region_cells = static_cast<std::size_t>(std::count(sweep.ray_stage1.begin(), sweep.ray_stage1.end(), true));
  if (!equilibrium.verified) {
    cert.message = "inconclusive: equilibrium not isolated (" + equilibrium.message + ")";
    return cert;
  }
  if (sweep.ray_stage1.size() != sweep.grid.size()) {
    cert.message = "inconclusive: sweep has no ray-certified region";
    return cert;
  }
  if (!sweep.center.contains(equilibrium.enclosure)) {
    cert.message = "inconclusive: equilibrium enclosure is not inside the center box of the sweep";
    return cert;
  }
  std::vector<std::size_t> lo, hi;
  if (!sweep.grid.cells_covering(equilibrium.enclosure, lo, hi)) {
    cert.message = "inconclusive: equilibrium enclosure leaves the grid";
    return cert;
  }
  const std::size_t n = sweep.grid.dimension();
  std::vector<std::size_t> multi = lo;
  for (;;) {
    if (!sweep.ray_stage1[sweep.grid.flat_index(multi)]) {
      cert.message = "inconclusive: equilibrium enclosure meets cells outside the certified region";
      return cert;
    }
    std::size_t a = 0;
    while (a < n && multi[a] == hi[a]) {
      multi[a] = lo[a];
      ++a;
    }
    if (a == n) break;
    ++multi[a];
  }
  cert.unique = true;
  cert.message = fmt::format("unique equilibrium in {} ray-certified cells", cert.region_cells);
  return cert;
}

TraceResult lyapunov_trace(const VectorField& f, const QuadraticForm& q, const Vec& x0, double target,
                           const TraceOptions& opts) {
  const std::size_t n = f.dimension();
  if (static_cast<std::size_t>(x0.size()) != n) throw UsageError("lyapunov_trace: dimension mismatch");
  const double l0 = q.value(x0);
  TraceResult res;
  if (target == l0) {
    res.endpoint = x0;
    res.time_endpoint = x0;
    res.levels = {l0};
    res.arc = {x0};
    return res;
  }

  const auto& comp = f.components();
  Expr g(0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double yij = q.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (yij == 0.0) continue;
      g = g + Expr(2.0 * yij) * (Expr::var(i) - Expr(q.center(static_cast<Eigen::Index>(i)))) * comp[j];
    }
  std::vector<Expr> rhs;
  for (std::size_t i = 0; i < n; ++i) rhs.push_back(comp[i] / g);
  rhs.push_back(Expr(1.0) / g);
  std::vector<std::string> vars = f.variables();
  vars.push_back("t");
  VectorField traced(f.name() + "_traced", vars, rhs);

  Vec z0(static_cast<Eigen::Index>(n + 1));
  z0.head(static_cast<Eigen::Index>(n)) = x0;
  z0(static_cast<Eigen::Index>(n)) = 0.0;
  Trajectory tr = reference_trajectory(traced, z0, target - l0);

  for (std::size_t k = 0; k < tr.x.size(); ++k) {
    Vec x = tr.x[k].head(static_cast<Eigen::Index>(n));
    if (!x.allFinite()) throw NumericalError("lyapunov_trace: arc left the finite range");
    Vec fx = f(x);
    Vec d = x - q.center;
    double rate = 2.0 * d.dot(q.y * fx);
    double scale = fx.norm() * d.norm();
    if (!(std::abs(rate) > opts.min_rate * scale) || scale == 0.0)
      throw NumericalError(fmt::format("lyapunov_trace: dL/dt vanishes on the arc at L = {}", l0 + tr.t[k]));
    res.levels.push_back(l0 + tr.t[k]);
    res.arc.push_back(x);
  }
  res.endpoint = res.arc.back();
  res.time = tr.x.back()(static_cast<Eigen::Index>(n));
  res.time_endpoint = reference_flow(f, x0, res.time);
  res.crosscheck_error = (res.time_endpoint - res.endpoint).lpNorm<Eigen::Infinity>();
  return res;
}

std::vector<double> zero_level_slopes(const Mat& y) {
  if (y.rows() != 2 || y.cols() != 2) throw UsageError("zero_level_slopes: 2x2 matrix required");
  const double a = y(1, 1), b = 0.5 * (y(0, 1) + y(1, 0)), c = y(0, 0);
  std::vector<double> s;
  if (a == 0.0) {
    if (b != 0.0) s.push_back(-c / (2.0 * b));
    return s;
  }
  double disc = b * b - a * c;
  if (disc < 0.0) return s;
  double r = std::sqrt(disc);
  s.push_back((-b - r) / a);
  s.push_back((-b + r) / a);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace lyap
