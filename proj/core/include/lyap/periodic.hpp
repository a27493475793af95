#pragma once

/**
 * @file periodic.hpp
 * @brief Periodic orbits as zeros of the bordered map
 * K(T, w) = (n^T (w - w~), phi(T, w) - w), verified with a Krawczyk
 * operator and epsilon-inflation.
 */

#include <optional>
#include <string>

#include "lyap/interval.hpp"
#include "lyap/krawczyk.hpp"
#include "lyap/odeint.hpp"
#include "lyap/poincare.hpp"
#include "lyap/reference.hpp"
#include "lyap/systems.hpp"

namespace lyap {

struct BorderedProblem {
  VectorField field;
  /// Unit normal n and anchor w~ of the bordering hyperplane.
  Section section;
  IntegratorConfig integrator;
};

/// Encloses K over the box z = (T, w).
IntervalVector K_eval(const BorderedProblem& prob, const IntervalVector& z);
/// Encloses [[0, n^T], [f(phi(T, w)), V(T; w) - I]] over z.
IntervalMatrix DK_eval(const BorderedProblem& prob, const IntervalVector& z);

/// Float K and DK from the reference integrator.
Vec K_reference(const BorderedProblem& prob, const Vec& z, const ReferenceOptions& opts = {});
Mat DK_reference(const BorderedProblem& prob, const Vec& z, const ReferenceOptions& opts = {});

/// Float Newton iteration on K (shooting); returns the refined (T, w).
Vec refine_periodic_seed(const BorderedProblem& prob, const Vec& seed, int max_steps = 30,
                         const ReferenceOptions& opts = {});

struct PeriodicOrbitCertificate {
  bool verified = false;
  Interval period;
  IntervalVector point;
  int iterations = 0;
  std::string message;
  /// Seed after float refinement.
  Vec seed;
  /// Eigenvalue enclosures of the section derivative (planar sections).
  std::optional<EigenEnclosure2> multipliers;
};

struct PeriodicOptions {
  KrawczykOptions krawczyk;
  /// Refine the seed by float shooting before the interval iteration.
  bool refine_seed = true;
};

PeriodicOrbitCertificate verify_periodic(const BorderedProblem& prob, const Vec& seed,
                                         const PeriodicOptions& opts = {});

}  // namespace lyap
