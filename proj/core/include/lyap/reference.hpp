#pragma once

/**
 * @file reference.hpp
 * @brief Non-rigorous high-order Taylor integration in binary64.
 *
 * Used for seeds, cross-checks and tracing; never for certificates.
 */

#include <vector>

#include "lyap/systems.hpp"

namespace lyap {

struct ReferenceOptions {
  int order = 24;
  /// Step is safety * (radius-of-convergence estimate).
  double safety = 0.2;
  double max_step = 1e300;
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
};

Vec reference_flow(const VectorField& f, const Vec& x0, double t, const ReferenceOptions& opts = {});

/// Flow and its state derivative V(t; x0).
void reference_flow_c1(const VectorField& f, const Vec& x0, double t, Vec& x, Mat& v,
                       const ReferenceOptions& opts = {});

/// Accepted steps from 0 to t_end (t may be negative for backward time).
Trajectory reference_trajectory(const VectorField& f, const Vec& x0, double t_end,
                                const ReferenceOptions& opts = {});

}  // namespace lyap
