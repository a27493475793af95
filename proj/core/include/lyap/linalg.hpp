#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lyap/interval.hpp"

namespace lyap {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Approximate eigendecomposition A = X diag(eigenvalues) X^-1.
struct SpectralData {
  CVec eigenvalues;
  CMat vectors;
  CMat inverse;
  /// Stability signs chosen by the caller (see flow_signs / map_signs).
  std::vector<int> signs;
  /// max(||X X^-1 - I||_inf, ||X L X^-1 - A||_inf / ||A||_inf)
  double residual = 0.0;
};

/**
 * Eigendecomposition with a fixed normalization: every eigenvector has unit
 * 2-norm and its largest-modulus entry real and positive; a complex pair is
 * stored in adjacent columns (positive imaginary part first, partner column
 * the exact conjugate). Throws NumericalError ("near-defective matrix") when
 * the residual exceeds the threshold.
 */
SpectralData eig_decompose(const Mat& a, double residual_threshold = 1e-8);

/// +1 for Re(l) < 0, -1 for Re(l) > 0. Throws NumericalError if some
/// |Re(l)| <= tol.
std::vector<int> flow_signs(const CVec& eigenvalues, double tol = 1e-10);
/// +1 for |l| < 1, -1 for |l| > 1. Throws NumericalError if ||l| - 1| <= tol.
std::vector<int> map_signs(const CVec& eigenvalues, double tol = 1e-10);

struct ApproxInverse {
  Mat inverse;
  double residual = 0.0;  // ||A A^-1 - I||_inf
};

/// Floating-point inverse; throws NumericalError when the residual is above
/// the threshold.
ApproxInverse approx_inverse(const Mat& a, double residual_threshold = 1e-6);

/// Rigorous enclosure of A^-1 (Neumann-series bound around a float inverse).
/// Throws NumericalError if the bound cannot be established.
IntervalMatrix enclose_inverse(const Mat& a);

/// Rigorous enclosure of the inverse of a complex point matrix, returned as
/// real and imaginary interval parts.
struct ComplexIntervalMatrix {
  IntervalMatrix re;
  IntervalMatrix im;
};
ComplexIntervalMatrix enclose_inverse(const CMat& a);

/// Row-wise Gershgorin test: true only if hi(m_ii) + sum_{j!=i} mag(m_ij) < 0
/// for every row. True certifies that every member with real spectrum
/// (in particular every symmetric member) is negative definite.
bool gershgorin_negdef(const IntervalMatrix& m);

/// Gershgorin test on X^-1 M X with X^-1 enclosed rigorously.
bool preconditioned_negdef(const IntervalMatrix& m, const Mat& x);

/// Interval Cholesky of -M using the upper triangle only. True certifies
/// that every symmetric member of M is negative definite.
bool cholesky_negdef(const IntervalMatrix& m);

enum class NegDefMethod { Gershgorin, Cholesky };

/// Orthonormal eigenvectors of the symmetric part of mid(m), for use as
/// the preconditioner X.
Mat symmetric_eigenvectors(const Mat& m);

/// Negative-definiteness check of an interval symmetric matrix using the
/// eigenvectors of its midpoint as preconditioner.
bool verify_negdef(const IntervalMatrix& m, NegDefMethod method = NegDefMethod::Gershgorin);

/// (M + M^T) / 2 in interval arithmetic.
IntervalMatrix symmetrize(const IntervalMatrix& m);

}  // namespace lyap
