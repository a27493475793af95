#pragma once

/**
 * @file odeint.hpp
 * @brief Validated Taylor integration with a Lohner-type QR frame.
 *
 * The set at each step is x_hat + B [r] with a point center x_hat, an
 * (almost) orthogonal point frame B and an interval box [r]. One step of
 * length tau:
 *   1. a-priori enclosure W of phi([0,h], X) by Picard inflation,
 *   2. Taylor polynomial of order p at x_hat plus the remainder
 *      tau^{p+1} c_{p+1}(W),
 *   3. derivative of the Taylor map over X from the Taylor coefficients of
 *      the variational equation, V_{k+1} = 1/(k+1) sum_j Df_j V_{k-j},
 *   4. new frame from a column-pivoted QR of mid(J B).
 */

#include <optional>
#include <vector>

#include "lyap/interval.hpp"
#include "lyap/systems.hpp"

namespace lyap {

struct IntegratorConfig {
  int taylor_order = 5;
  int steps = 100;
  /// Relative growth applied to the trial set in each Picard retry (> 1).
  double inflation = 1.1;
  int max_retries = 12;
  /// Divergence is reported when any bound exceeds this magnitude.
  double divergence_bound = 1e8;
  /// Halve the step on Picard failure instead of failing.
  bool adaptive = false;

  void validate() const;
};

enum class IntegrationMode { C0, C1 };

struct FlowEnclosure {
  Interval time;
  IntervalVector state;
  std::optional<IntervalMatrix> variational;
};

/// Data of one completed step, enough to enclose the flow at any time
/// inside the step.
class StepRecord {
 public:
  /// Start time of the step (enclosure of the exact elapsed time).
  Interval t0;
  /// Largest admissible local time; the step covers tau in [0, h].
  double h = 0.0;
  /// phi([0,h], set) is contained in this box.
  IntervalVector apriori;

  /// Enclosure of phi(t0 + tau, set) for every tau in the given local
  /// interval, which must lie in [0, h].
  IntervalVector eval(const Interval& tau) const;

 private:
  friend class LohnerSolver;
  std::vector<IntervalVector> center_coeffs;  // c_i(x_hat), i = 0..p
  std::vector<IntervalMatrix> jac_coeffs;     // V_i over the box, i = 0..p
  IntervalVector remainder_coeff;             // c_{p+1}(W)
  Mat frame;                                  // B at step start
  IntervalVector r;                           // [r] at step start
};

class LohnerSolver {
 public:
  LohnerSolver(const VectorField& field, const IntervalVector& x0, const IntegratorConfig& cfg);

  /// Advances by tau (an interval of admissible step lengths, tau.lo() >= 0).
  /// The returned record covers local times [0, tau.hi()].
  StepRecord step(const Interval& tau);

  const Interval& time() const noexcept { return t_; }
  /// Interval hull of the current set.
  IntervalVector enclosure() const;
  std::size_t dimension() const noexcept { return n_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }

 private:
  IntervalVector apriori(const IntervalVector& x, double h) const;

  VectorField field_;
  IntegratorConfig cfg_;
  std::size_t n_;
  Vec center_;
  Mat frame_;
  IntervalVector r_;
  Interval t_;
};

/// Enclosure of phi(t_end, x0) (and V(t_end; x0) in C1 mode).
FlowEnclosure integrate(const VectorField& field, const IntervalVector& x0, double t_end,
                        const IntegratorConfig& cfg = {}, IntegrationMode mode = IntegrationMode::C0);

/// Enclosure of phi(t, x0) over all t in the window. Uses cfg.steps uniform
/// steps over [0, window.hi()].
FlowEnclosure integrate_range(const VectorField& field, const IntervalVector& x0,
                              const Interval& window, const IntegratorConfig& cfg = {},
                              IntegrationMode mode = IntegrationMode::C0);

/// Initial set (x0, I) for the coupled variational system.
IntervalVector variational_initial(const IntervalVector& x0);
/// Splits a coupled (x, V) enclosure.
void split_variational(const IntervalVector& xv, std::size_t n, IntervalVector& x, IntervalMatrix& v);

}  // namespace lyap
