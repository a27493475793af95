#include "lyap/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace lyap {

Section::Section(Vec normal, Vec anchor) : normal_(std::move(normal)), anchor_(std::move(anchor)) {
  const Eigen::Index n = normal_.size();
  if (n < 2 || anchor_.size() != n) throw UsageError("section: normal and anchor must have the same dimension >= 2");
  if (!normal_.allFinite() || !anchor_.allFinite()) throw UsageError("section: non-finite normal or anchor");
  if (std::abs(normal_.norm() - 1.0) > 1e-12) throw UsageError("section: normal must be a unit vector");
  int nonzero = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (normal_(i) != 0.0) {
      ++nonzero;
      axis_ = static_cast<int>(i);
    }
  if (nonzero != 1 || std::abs(normal_(axis_)) != 1.0) axis_ = -1;

  basis_ = Mat::Zero(n, n - 1);
  if (axis_ >= 0) {
    for (Eigen::Index i = 0, c = 0; i < n; ++i)
      if (i != axis_) basis_(i, c++) = 1.0;
  } else {
    Eigen::HouseholderQR<Mat> qr(normal_);
    Mat q = qr.householderQ() * Mat::Identity(n, n);
    basis_ = q.rightCols(n - 1);
  }
}

Interval Section::distance(const IntervalVector& x) const {
  if (x.size() != dimension()) throw UsageError("section: dimension mismatch");
  Interval d(0.0);
  for (std::size_t i = 0; i < dimension(); ++i) {
    const double ni = normal_(static_cast<Eigen::Index>(i));
    if (ni != 0.0) d += Interval(ni) * (x[i] - Interval(anchor_(static_cast<Eigen::Index>(i))));
  }
  return d;
}

double Section::distance(const Vec& x) const { return normal_.dot(x - anchor_); }

IntervalVector Section::embed(const IntervalVector& s) const {
  const std::size_t n = dimension();
  if (s.size() + 1 != n) throw UsageError("section: chart dimension mismatch");
  if (axis_ >= 0) {
    IntervalVector x(n);
    for (std::size_t i = 0, c = 0; i < n; ++i)
      x[i] = (static_cast<int>(i) == axis_) ? Interval(anchor_(axis_)) : s[c++];
    return x;
  }
  return mat_vec(basis_, s) + anchor_;
}

Vec Section::embed(const Vec& s) const {
  if (static_cast<std::size_t>(s.size()) + 1 != dimension()) throw UsageError("section: chart dimension mismatch");
  if (axis_ >= 0) {
    Vec x = basis_ * s;
    x(axis_) = anchor_(axis_);
    return x;
  }
  return anchor_ + basis_ * s;
}

IntervalVector Section::project(const IntervalVector& x) const {
  const std::size_t n = dimension();
  if (x.size() != n) throw UsageError("section: dimension mismatch");
  if (axis_ >= 0) {
    IntervalVector s(n - 1);
    for (std::size_t i = 0, c = 0; i < n; ++i)
      if (static_cast<int>(i) != axis_) s[c++] = x[i];
    return s;
  }
  return mat_vec(Mat(basis_.transpose()), x - anchor_);
}

Vec Section::project(const Vec& x) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) throw UsageError("section: dimension mismatch");
  if (axis_ >= 0) return basis_.transpose() * x;
  return basis_.transpose() * (x - anchor_);
}

IntervalMatrix Section::restrict(const IntervalMatrix& m) const {
  const std::size_t n = dimension();
  if (m.rows() != n || m.cols() != n) throw UsageError("section: dimension mismatch");
  if (axis_ >= 0) {
    IntervalMatrix r(n - 1, n - 1);
    for (std::size_t i = 0, ri = 0; i < n; ++i) {
      if (static_cast<int>(i) == axis_) continue;
      for (std::size_t j = 0, rj = 0; j < n; ++j) {
        if (static_cast<int>(j) == axis_) continue;
        r(ri, rj++) = m(i, j);
      }
      ++ri;
    }
    return r;
  }
  return mat_mul(Mat(basis_.transpose()), mat_mul(m, basis_));
}

Mat Section::restrict(const Mat& m) const { return basis_.transpose() * m * basis_; }

PoincareMap::PoincareMap(VectorField field, Section section, IntegratorConfig cfg, double return_time,
                         double max_time_factor)
    : field_(std::move(field)),
      section_(std::move(section)),
      cfg_(cfg),
      return_time_(return_time),
      max_time_factor_(max_time_factor) {
  cfg_.validate();
  if (field_.dimension() != section_.dimension()) throw UsageError("poincare: section dimension mismatch");
  if (!(return_time_ > 0.0) || !std::isfinite(return_time_)) throw UsageError("poincare: return time must be positive");
  if (!(max_time_factor_ > 1.0)) throw UsageError("poincare: max_time_factor must exceed 1");
}

namespace {

// +1 strictly on the arrival side, -1 strictly on the departure side.
int side(const Section& sec, const IntervalVector& x, int sigma) {
  Interval d = sec.distance(x) * static_cast<double>(sigma);
  if (d.certainly_positive()) return 1;
  if (d.certainly_negative()) return -1;
  return 0;
}

}  // namespace

ReturnEnclosure PoincareMap::return_enclosure(const IntervalVector& x0, IntegrationMode mode) const {
  const std::size_t n = field_.dimension();
  if (x0.size() != n) throw UsageError("poincare: dimension mismatch");
  const bool c1 = mode == IntegrationMode::C1;

  Interval nf0 = dot(section_.normal(), field_(x0));
  if (nf0.contains_zero())
    throw PoincareError(PoincareError::Kind::TangentialCrossing,
                        fmt::format("tangential crossing: n.f = {} at the initial set", to_string(nf0)));
  const int sigma = nf0.certainly_positive() ? 1 : -1;
  auto state_of = [&](const IntervalVector& v) { return c1 ? v.segment(0, n) : v; };

  LohnerSolver solver(c1 ? field_.variational() : field_, c1 ? variational_initial(x0) : x0, cfg_);
  double h = return_time_ / cfg_.steps;
  const double h_min = h * std::ldexp(1.0, -cfg_.max_retries);
  const double max_time = max_time_factor_ * return_time_;

  bool departed = false;
  std::vector<StepRecord> window;
  for (;;) {
    if (solver.time().lo() > max_time)
      throw PoincareError(PoincareError::Kind::NoReturn,
                          fmt::format("no return to the section before t = {}", max_time));
    StepRecord rec;
    try {
      rec = solver.step(Interval(h));
    } catch (const IntegrationError& e) {
      if (!cfg_.adaptive || e.kind() != IntegrationError::Kind::StepFailure || h / 2 < h_min) throw;
      h /= 2;
      continue;
    }
    const int end_side = side(section_, state_of(solver.enclosure()), sigma);
    if (!departed) {
      if (end_side == -1) departed = true;
      continue;
    }
    if (side(section_, state_of(rec.apriori), sigma) == -1) {
      window.clear();
      continue;
    }
    window.push_back(std::move(rec));
    if (end_side == 1) break;
  }

  // Positions p in [0, W]: record r covers [r, r + 1].
  const double w = static_cast<double>(window.size());
  auto local = [&](double p, std::size_t& r) {
    r = std::min(static_cast<std::size_t>(p), window.size() - 1);
    return std::min(window[r].h, (p - static_cast<double>(r)) * window[r].h);
  };
  auto side_at = [&](double p) {
    std::size_t r;
    double tau = local(p, r);
    return side(section_, state_of(window[r].eval(Interval(tau))), sigma);
  };

  double plo = 0.0, phi = w;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (plo + phi);
    if (mid <= plo || mid >= phi) break;
    int s = side_at(mid);
    if (s == -1) {
      plo = mid;
    } else if (s == 1) {
      phi = mid;
    } else {
      double bad = mid;
      for (int k = 0; k < 50; ++k) {
        double m = 0.5 * (plo + bad);
        if (m <= plo || m >= bad) break;
        int sm = side_at(m);
        if (sm == -1) plo = m;
        else bad = m;
      }
      bad = mid;
      for (int k = 0; k < 50; ++k) {
        double m = 0.5 * (bad + phi);
        if (m <= bad || m >= phi) break;
        int sm = side_at(m);
        if (sm == 1) phi = m;
        else bad = m;
      }
      break;
    }
  }

  std::size_t rlo, rhi;
  double tlo = local(plo, rlo), thi = local(phi, rhi);
  if (phi == w) {
    rhi = window.size() - 1;
    thi = window[rhi].h;
  }
  ReturnEnclosure out;
  out.time = Interval((window[rlo].t0 + Interval(tlo)).lo(), (window[rhi].t0 + Interval(thi)).hi());

  IntervalVector xs;
  IntervalVector whole;
  for (std::size_t r = 0; r < window.size(); ++r) {
    IntervalVector full = window[r].eval(Interval(0.0, window[r].h));
    whole = r == 0 ? full : hull(whole, full);
    if (r < rlo || r > rhi) continue;
    double a = r == rlo ? tlo : 0.0;
    double b = r == rhi ? thi : window[r].h;
    IntervalVector e = window[r].eval(Interval(a, b));
    xs = xs.empty() ? e : hull(xs, e);
  }

  Interval nf_window = dot(section_.normal(), field_(state_of(whole)));
  if (nf_window.contains_zero())
    throw PoincareError(PoincareError::Kind::TangentialCrossing,
                        fmt::format("tangential crossing: n.f = {} near t = {}", to_string(nf_window),
                                    to_string(out.time)));

  out.state = state_of(xs);
  out.section_state = section_.project(out.state);
  IntervalVector fx = field_(out.state);
  out.transversality = dot(section_.normal(), fx);
  if (out.transversality.contains_zero())
    throw PoincareError(PoincareError::Kind::TangentialCrossing, "tangential crossing at the return");

  if (c1) {
    IntervalVector xpart;
    IntervalMatrix v;
    split_variational(xs, n, xpart, v);
    IntervalMatrix proj = IntervalMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) {
      Interval q = fx[i] / out.transversality;
      for (std::size_t j = 0; j < n; ++j) {
        double nj = section_.normal()(static_cast<Eigen::Index>(j));
        if (nj != 0.0) proj(i, j) -= q * nj;
      }
    }
    out.variational = v;
    out.dp = section_.restrict(mat_mul(proj, v));
  }
  return out;
}

ReturnEnclosure PoincareMap::map(const IntervalVector& s, IntegrationMode mode) const {
  return return_enclosure(section_.embed(s), mode);
}

ReferenceReturn PoincareMap::reference_return(const Vec& x0, const ReferenceOptions& opts) const {
  const double nf0 = section_.normal().dot(field_(x0));
  if (nf0 == 0.0) throw PoincareError(PoincareError::Kind::TangentialCrossing, "tangential crossing at the start");
  const double sigma = nf0 > 0 ? 1.0 : -1.0;
  Trajectory tr = reference_trajectory(field_, x0, max_time_factor_ * return_time_, opts);

  bool departed = false;
  std::size_t k = 0;
  for (std::size_t i = 1; i < tr.x.size(); ++i) {
    double d = sigma * section_.distance(tr.x[i]);
    if (!departed) {
      if (d < 0) departed = true;
      continue;
    }
    if (d > 0) {
      k = i;
      break;
    }
  }
  if (k == 0) throw PoincareError(PoincareError::Kind::NoReturn, "no return to the section (reference)");

  // Safeguarded Newton on tau -> n.(phi(tau, x_{k-1}) - anchor).
  const Vec& xa = tr.x[k - 1];
  double a = 0.0, b = tr.t[k] - tr.t[k - 1];
  double da = section_.distance(xa), db = section_.distance(tr.x[k]);
  double tau = a + (b - a) * da / (da - db);
  Vec x = reference_flow(field_, xa, tau, opts);
  for (int it = 0; it < 50; ++it) {
    double g = section_.distance(x);
    if (g == 0.0) break;
    if ((g > 0) == (da > 0)) a = tau;
    else b = tau;
    double next = tau - g / section_.normal().dot(field_(x));
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (std::abs(next - tau) <= 4e-16 * std::max(1.0, std::abs(tr.t[k - 1] + tau))) {
      tau = next;
      x = reference_flow(field_, xa, tau, opts);
      break;
    }
    tau = next;
    x = reference_flow(field_, xa, tau, opts);
  }
  ReferenceReturn out;
  out.time = tr.t[k - 1] + tau;
  out.state = x;
  out.section_state = section_.project(x);
  return out;
}

ReferenceReturn PoincareMap::reference_return_c1(const Vec& x0, const ReferenceOptions& opts) const {
  ReferenceReturn out = reference_return(x0, opts);
  Vec x;
  Mat v;
  reference_flow_c1(field_, x0, out.time, x, v, opts);
  Vec f = field_(x);
  const Vec& nrm = section_.normal();
  Mat proj = Mat::Identity(f.size(), f.size()) - f * nrm.transpose() / nrm.dot(f);
  out.dp = section_.restrict(Mat(proj * v));
  return out;
}

IntervalMatrix dp_enclosure(const PoincareMap& p, const IntervalVector& s) {
  return *p.map(s, IntegrationMode::C1).dp;
}

EigenEnclosure2 eigen_enclosure_2x2(const IntervalMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw UsageError("eigen_enclosure_2x2: 2x2 matrix required");
  Interval tr = m(0, 0) + m(1, 1);
  Interval det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  Interval disc = sqr(m(0, 0) - m(1, 1)) + Interval(4.0) * m(0, 1) * m(1, 0);
  EigenEnclosure2 out;
  auto real_pair = [&](const Interval& root) {
    const bool plus = tr.mid() >= 0.0;
    Interval big = (plus ? tr + root : tr - root) * 0.5;
    Interval small = (plus ? tr - root : tr + root) * 0.5;
    if (!big.contains_zero()) {
      if (auto cut = intersect(small, det / big)) small = *cut;
    }
    out.first = big;
    out.second = small;
  };
  if (disc.certainly_positive()) {
    out.kind = EigenEnclosure2::Kind::Real;
    real_pair(sqrt(disc));
    return out;
  }
  out.real_part = tr * 0.5;
  if (disc.certainly_negative()) {
    out.kind = EigenEnclosure2::Kind::Complex;
    out.modulus = sqrt(Interval(std::max(0.0, det.lo()), std::max(0.0, det.hi())));
    return out;
  }
  out.kind = EigenEnclosure2::Kind::Indeterminate;
  real_pair(sqrt(Interval(0.0, disc.hi())));
  if (det.hi() > 0.0) out.modulus = sqrt(Interval(std::max(0.0, det.lo()), det.hi()));
  return out;
}

}  // namespace lyap
