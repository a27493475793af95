#pragma once

/**
 * @file krawczyk.hpp
 * @brief Interval Newton / Krawczyk existence and uniqueness verification
 * with epsilon-inflation.
 */

#include <functional>
#include <string>

#include "lyap/interval.hpp"
#include "lyap/systems.hpp"

namespace lyap {

struct KrawczykOptions {
  double epsilon = 0.1;
  int max_iterations = 30;
  /// Half-width of the initial box around the seed.
  double initial_radius = 1e-6;
  /// Use the interval Newton operator N instead of Krawczyk's K.
  bool plain_newton = false;
};

struct KrawczykResult {
  bool verified = false;
  /// Box containing a unique zero when verified; last tried box otherwise.
  IntervalVector enclosure;
  int iterations = 0;
  std::string message;
};

using BoxFunction = std::function<IntervalVector(const IntervalVector&)>;
using BoxJacobian = std::function<IntervalMatrix(const IntervalVector&)>;

/**
 * Verifies a zero of F near seed. R approximates DF(seed)^-1. Each iteration
 * evaluates K(Z) = z - R F(z) + (I - R DF(Z))(Z - z), z = mid(Z), and
 * accepts when K(Z) lies in the interior of Z; otherwise
 * Z <- (1+eps) K(Z) - eps K(Z).
 */
KrawczykResult krawczyk_verify(const BoxFunction& f, const BoxJacobian& df, const Vec& seed,
                               const Mat& r, const KrawczykOptions& opts = {});

/// Solves [A] x = [b] by interval Gaussian elimination (A should be close
/// to the identity). Throws NumericalError when a pivot contains zero.
IntervalVector interval_gauss(const IntervalMatrix& a, const IntervalVector& b);

/// Float Newton iteration on a smooth system; returns the refined point.
Vec newton_refine(const ExprSystem& f, const Vec& seed, int max_steps = 20, double tol = 1e-15);

/// Krawczyk verification of an equilibrium of the field / zero of f.
KrawczykResult verify_zero(const ExprSystem& f, const Vec& seed, const KrawczykOptions& opts = {});

}  // namespace lyap
