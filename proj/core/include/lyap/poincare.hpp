#pragma once

/**
 * @file poincare.hpp
 * @brief Validated first-return maps on hyperplane sections.
 */

#include <optional>
#include <string>

#include "lyap/interval.hpp"
#include "lyap/odeint.hpp"
#include "lyap/reference.hpp"
#include "lyap/systems.hpp"

namespace lyap {

/// Hyperplane {x : n^T (x - anchor) = 0} with a coordinate chart.
/// Axis-aligned normals drop the normal coordinate; other normals use an
/// orthonormal basis E of the complement, s = E^T (x - anchor).
class Section {
 public:
  Section() = default;
  Section(Vec normal, Vec anchor);

  const Vec& normal() const noexcept { return normal_; }
  const Vec& anchor() const noexcept { return anchor_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(normal_.size()); }
  /// Dropped coordinate for axis-aligned sections, -1 otherwise.
  int dropped_axis() const noexcept { return axis_; }
  /// Embedding of chart directions, n x (n-1).
  const Mat& basis() const noexcept { return basis_; }

  Interval distance(const IntervalVector& x) const;
  double distance(const Vec& x) const;

  IntervalVector embed(const IntervalVector& s) const;
  Vec embed(const Vec& s) const;
  IntervalVector project(const IntervalVector& x) const;
  Vec project(const Vec& x) const;
  /// E^T M E.
  IntervalMatrix restrict(const IntervalMatrix& m) const;
  Mat restrict(const Mat& m) const;

 private:
  Vec normal_;
  Vec anchor_;
  int axis_ = -1;
  Mat basis_;
};

struct ReturnEnclosure {
  /// [t_lo, t_hi]: signed distance has opposite strict signs at the ends.
  Interval time;
  /// phi([t], x0).
  IntervalVector state;
  /// project(state).
  IntervalVector section_state;
  /// n^T f over the crossing window; excludes 0.
  Interval transversality;
  /// V([t]; x0), present for C1 evaluations.
  std::optional<IntervalMatrix> variational;
  /// Chart derivative E^T (I - f n^T / (n^T f)) V E, present for C1.
  std::optional<IntervalMatrix> dp;
};

/// Non-rigorous return used for seeds and float derivatives.
struct ReferenceReturn {
  double time = 0.0;
  Vec state;
  Vec section_state;
  /// Chart derivative, filled by reference_return_c1.
  Mat dp;
};

class PoincareMap {
 public:
  /// return_time is the approximate return time; the integrator uses
  /// cfg.steps uniform steps of length return_time / cfg.steps and searches
  /// up to max_time_factor * return_time.
  PoincareMap(VectorField field, Section section, IntegratorConfig cfg, double return_time,
              double max_time_factor = 2.0);

  const VectorField& field() const noexcept { return field_; }
  const Section& section() const noexcept { return section_; }
  const IntegratorConfig& config() const noexcept { return cfg_; }
  double return_time() const noexcept { return return_time_; }
  std::size_t dimension() const noexcept { return section_.dimension() - 1; }

  /// Validated first return of a box of full-space points. Throws
  /// PoincareError (NoReturn, TangentialCrossing) or IntegrationError.
  ReturnEnclosure return_enclosure(const IntervalVector& x0, IntegrationMode mode = IntegrationMode::C0) const;
  /// Same for a box in chart coordinates.
  ReturnEnclosure map(const IntervalVector& s, IntegrationMode mode = IntegrationMode::C0) const;

  ReferenceReturn reference_return(const Vec& x0, const ReferenceOptions& opts = {}) const;
  ReferenceReturn reference_return_c1(const Vec& x0, const ReferenceOptions& opts = {}) const;

 private:
  VectorField field_;
  Section section_;
  IntegratorConfig cfg_;
  double return_time_;
  double max_time_factor_;
};

/// Chart derivative enclosure of the return map at a chart box.
IntervalMatrix dp_enclosure(const PoincareMap& p, const IntervalVector& s);

struct EigenEnclosure2 {
  enum class Kind { Real, Complex, Indeterminate };
  Kind kind = Kind::Real;
  /// Real case: larger-modulus root first. Complex / indeterminate: hull
  /// of the real parts of a real pair (indeterminate only).
  Interval first;
  Interval second;
  /// Complex / indeterminate: modulus of a complex pair and its real part.
  Interval modulus;
  Interval real_part;
};

/// Eigenvalue enclosures of a 2x2 interval matrix from the trace and
/// discriminant.
EigenEnclosure2 eigen_enclosure_2x2(const IntervalMatrix& m);

}  // namespace lyap
