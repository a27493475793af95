#include "lyap/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace lyap {

namespace {

// Scales column c so it has unit norm and its largest-modulus entry is real
// positive.
void normalize_column(CMat& x, Eigen::Index c) {
  double nrm = x.col(c).norm();
  if (!(nrm > 0.0)) throw NumericalError("eig_decompose: zero eigenvector");
  x.col(c) /= nrm;
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = std::abs(x(i, c));
    if (m > best_abs * (1.0 + 1e-12)) {
      best_abs = m;
      best = i;
    }
  }
  std::complex<double> phase = std::conj(x(best, c)) / std::abs(x(best, c));
  x.col(c) *= phase;
  x(best, c) = std::complex<double>(std::abs(x(best, c)), 0.0);
}

}  // namespace

SpectralData eig_decompose(const Mat& a, double residual_threshold) {
  if (a.rows() != a.cols()) throw UsageError("eig_decompose: matrix must be square");
  const Eigen::Index n = a.rows();
  if (!a.allFinite()) throw NumericalError("eig_decompose: non-finite matrix");
  Eigen::EigenSolver<Mat> es(a, true);
  if (es.info() != Eigen::Success) throw NumericalError("eig_decompose: eigen solver failed");
  CVec ev = es.eigenvalues();
  CMat vec = es.eigenvectors();
  const double scale = std::max(1.0, a.lpNorm<Eigen::Infinity>());
  const double imag_tol = 1e-14 * scale;

  SpectralData out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Eigen::Index slot = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (used[i]) continue;
    used[i] = true;
    if (std::abs(ev(i).imag()) <= imag_tol) {
      out.eigenvalues(slot) = std::complex<double>(ev(i).real(), 0.0);
      out.vectors.col(slot) = vec.col(i).real().cast<std::complex<double>>();
      normalize_column(out.vectors, slot);
      ++slot;
      continue;
    }
    Eigen::Index partner = -1;
    double best = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      double d = std::abs(ev(j) - std::conj(ev(i)));
      if (partner < 0 || d < best) {
        partner = j;
        best = d;
      }
    }
    if (partner < 0 || best > 1e-8 * scale)
      throw NumericalError("eig_decompose: complex eigenvalue without conjugate partner");
    used[partner] = true;
    Eigen::Index pos = ev(i).imag() > 0 ? i : partner;
    out.eigenvalues(slot) = ev(pos);
    out.vectors.col(slot) = vec.col(pos);
    normalize_column(out.vectors, slot);
    out.eigenvalues(slot + 1) = std::conj(out.eigenvalues(slot));
    out.vectors.col(slot + 1) = out.vectors.col(slot).conjugate();
    slot += 2;
  }

  Eigen::PartialPivLU<CMat> lu(out.vectors);
  out.inverse = lu.inverse();
  CMat ident = CMat::Identity(n, n);
  double r1 = (out.vectors * out.inverse - ident).cwiseAbs().rowwise().sum().maxCoeff();
  CMat rec = out.vectors * out.eigenvalues.asDiagonal() * out.inverse;
  double r2 = (rec - a.cast<std::complex<double>>()).cwiseAbs().rowwise().sum().maxCoeff() / scale;
  out.residual = std::max(r1, r2);
  if (!(out.residual <= residual_threshold))
    throw NumericalError(fmt::format("near-defective matrix (residual {:.3g})", out.residual));
  return out;
}

std::vector<int> flow_signs(const CVec& eigenvalues, double tol) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double re = eigenvalues(i).real();
    if (std::abs(re) <= tol)
      throw NumericalError(fmt::format("numerically non-hyperbolic: Re(lambda) = {:.3g}", re));
    s.push_back(re < 0 ? 1 : -1);
  }
  return s;
}

std::vector<int> map_signs(const CVec& eigenvalues, double tol) {
  std::vector<int> s;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double m = std::abs(eigenvalues(i));
    if (std::abs(m - 1.0) <= tol)
      throw NumericalError(fmt::format("numerically non-hyperbolic: |lambda| = {:.17g}", m));
    s.push_back(m < 1.0 ? 1 : -1);
  }
  return s;
}

ApproxInverse approx_inverse(const Mat& a, double residual_threshold) {
  if (a.rows() != a.cols()) throw UsageError("approx_inverse: matrix must be square");
  Eigen::PartialPivLU<Mat> lu(a);
  ApproxInverse r;
  r.inverse = lu.inverse();
  Mat e = a * r.inverse - Mat::Identity(a.rows(), a.cols());
  r.residual = e.cwiseAbs().rowwise().sum().maxCoeff();
  if (!(r.residual <= residual_threshold))
    throw NumericalError(fmt::format("singular matrix (residual {:.3g})", r.residual));
  return r;
}

IntervalMatrix enclose_inverse(const Mat& a) {
  using namespace rounding;
  if (a.rows() != a.cols()) throw UsageError("enclose_inverse: matrix must be square");
  const std::size_t n = static_cast<std::size_t>(a.rows());
  Mat r = Eigen::PartialPivLU<Mat>(a).inverse();
  if (!r.allFinite()) throw NumericalError("enclose_inverse: singular matrix");
  // E = I - R A, A^-1 = R + E R + (I - E)^-1 E^2 R.
  IntervalMatrix e = IntervalMatrix::identity(n) - enclose_product(r, a);
  double en = norm_inf(e);
  if (!(en < 1.0)) throw NumericalError("enclose_inverse: cannot verify inverse");
  double rn = norm_inf(IntervalMatrix::point(r));
  double delta = div_up(mul_up(mul_up(en, en), rn), sub_down(1.0, en));
  IntervalMatrix out = IntervalMatrix::point(r) + mat_mul(e, r);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = inflate(out(i, j), delta);
  return out;
}

ComplexIntervalMatrix enclose_inverse(const CMat& a) {
  if (a.rows() != a.cols()) throw UsageError("enclose_inverse: matrix must be square");
  const Eigen::Index n = a.rows();
  Mat big(2 * n, 2 * n);
  big << a.real(), -a.imag(), a.imag(), a.real();
  IntervalMatrix inv = enclose_inverse(big);
  const std::size_t m = static_cast<std::size_t>(n);
  return {inv.block(0, 0, m, m), inv.block(m, 0, m, m)};
}

bool gershgorin_negdef(const IntervalMatrix& m) {
  using namespace rounding;
  if (m.rows() != m.cols()) throw UsageError("gershgorin_negdef: matrix must be square");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = m(i, i).hi();
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (j != i) s = add_up(s, m(i, j).mag());
    if (!(s < 0.0)) return false;
  }
  return true;
}

bool preconditioned_negdef(const IntervalMatrix& m, const Mat& x) {
  if (m.rows() != m.cols() || static_cast<std::size_t>(x.rows()) != m.rows() ||
      x.rows() != x.cols())
    throw UsageError("preconditioned_negdef: shape mismatch");
  IntervalMatrix xinv = enclose_inverse(x);
  IntervalMatrix c = mat_mul(mat_mul(xinv, m), x);
  return gershgorin_negdef(c);
}

bool cholesky_negdef(const IntervalMatrix& m) {
  if (m.rows() != m.cols()) throw UsageError("cholesky_negdef: matrix must be square");
  const std::size_t n = m.rows();
  // Work on -M; L stored in the lower triangle.
  IntervalMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Interval d = -m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= sqr(l(j, k));
    if (!d.certainly_positive()) return false;
    l(j, j) = sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      Interval s = -m(j, i);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

Mat symmetric_eigenvectors(const Mat& m) {
  Mat s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigen solver failed");
  return es.eigenvectors();
}

bool verify_negdef(const IntervalMatrix& m, NegDefMethod method) {
  if (method == NegDefMethod::Cholesky) return cholesky_negdef(m);
  if (gershgorin_negdef(m)) return true;
  return preconditioned_negdef(m, symmetric_eigenvectors(m.mid()));
}

IntervalMatrix symmetrize(const IntervalMatrix& m) {
  if (m.rows() != m.cols()) throw UsageError("symmetrize: matrix must be square");
  IntervalMatrix s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.cols(); ++j) {
      Interval v = (m(i, j) + m(j, i)) * 0.5;
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

}  // namespace lyap
