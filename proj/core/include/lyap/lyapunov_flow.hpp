#pragma once

/**
 * @file lyapunov_flow.hpp
 * @brief Quadratic Lyapunov functions around hyperbolic equilibria of flows
 * and their validated domains.
 *
 * L(x) = (x - x*)^T Y (x - x*) with Y = Re(X^-H M* X^-1), where X
 * diagonalizes Df(x*) and M* = diag(+-m_j) (+ for stable, - for unstable
 * directions).
 */

#include <string>
#include <vector>

#include "lyap/grid.hpp"
#include "lyap/interval.hpp"
#include "lyap/krawczyk.hpp"
#include "lyap/linalg.hpp"
#include "lyap/systems.hpp"

namespace lyap {

/// Positive per-eigendirection weights; empty means all ones.
struct MWeights {
  std::vector<double> m;

  static MWeights ones(std::size_t n) { return {std::vector<double>(n, 1.0)}; }
  /// Weights resolved for dimension n (throws on bad size or sign).
  std::vector<double> resolve(std::size_t n) const;
};

struct QuadraticForm {
  /// Float center used for the construction.
  Vec center;
  /// Enclosure of the exact fixed point; the checks hold for every center
  /// in this box. Degenerate (= center) unless set from a verification.
  IntervalVector center_box;
  /// Exactly symmetric.
  Mat y;
  SpectralData spectrum;
  /// max |Im| of the complex matrix before taking the real part.
  double imag_residual = 0.0;
  /// Counts of positive / negative eigenvalues of Y.
  int positive = 0;
  int negative = 0;

  double value(const Vec& x) const;
  /// Enclosure of L over a box (for every admissible center).
  Interval value(const IntervalVector& x) const;
};

/// Y from spectral data and signs (shared by flows and maps).
QuadraticForm quadratic_from_spectrum(const SpectralData& s, const Vec& center, const MWeights& m);

QuadraticForm build_quadratic_flow(const VectorField& f, const Vec& center, const MWeights& m = {});

/// Stage 1: Df(cell)^T Y + Y Df(cell) strictly negative definite.
bool stage1_flow(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell,
                 NegDefMethod method = NegDefMethod::Gershgorin);

/// Stage 2: dL/dt = 2 (x - x*)^T Y f(x) < 0 on the cell.
bool stage2_flow(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell);

/// Enclosure of dL/dt over the cell (naive form intersected with a
/// mean-value form around the cell midpoint).
Interval lyapunov_derivative(const VectorField& f, const QuadraticForm& q, const IntervalVector& cell);

struct SweepOptions {
  unsigned threads = 0;
  NegDefMethod method = NegDefMethod::Gershgorin;
  /// Compute the ray-certified star-shaped domain.
  bool ray_certify = true;
};

struct SweepResult {
  Grid grid;
  /// Center box the ray closure was computed from.
  IntervalVector center;
  std::vector<CellVerdict> cells;
  /// Stage-1 cells whose segments to x* stay in stage-1 cells.
  std::vector<bool> ray_stage1;
  /// Certified Lyapunov domain: stage 2, or ray-certified stage 1.
  std::vector<bool> certified;
  std::size_t count(Color c) const;
  std::size_t certified_count() const;
};

SweepResult sweep_flow(const VectorField& f, const QuadraticForm& q, const Grid& grid,
                       const SweepOptions& opts = {});

/// Ray closure used by sweep_flow: marks stage-1 cells C such that every
/// segment from the center box to C lies in stage-1 cells.
std::vector<bool> ray_certify(const Grid& grid, const std::vector<CellVerdict>& cells,
                              const IntervalVector& center, unsigned threads = 0);

/// Sufficient hyperbolicity / uniqueness criterion on a domain:
/// |Re l_i| > sum_j |V(z)_ij| and |Re l_i| > sum_j |V(z)_ji| with
/// X^-1 Df(z) X = Lambda + V(z).
bool hyperbolicity_check(const VectorField& f, const IntervalVector& center, const IntervalVector& domain);

struct UniquenessCertificate {
  bool unique = false;
  IntervalVector enclosure;
  /// Number of grid cells in the star-shaped stage-1 region.
  std::size_t region_cells = 0;
  std::string message;
};

/// x* is the unique equilibrium in the ray-certified stage-1 region when
/// its Krawczyk enclosure lies in that region.
UniquenessCertificate unique_equilibrium_report(const SweepResult& sweep, const KrawczykResult& equilibrium);

struct TraceOptions {
  /// |dL/dt| below this (relative to |f||x - x*|) aborts the trace.
  double min_rate = 1e-12;
};

struct TraceResult {
  Vec endpoint;
  /// Elapsed flow time between x0 and the endpoint.
  double time = 0.0;
  std::vector<double> levels;
  std::vector<Vec> arc;
  /// phi(time, x0) from a time integration, and its distance to endpoint.
  Vec time_endpoint;
  double crosscheck_error = 0.0;
};

/// Integrates dx/dL = f(x) / (2 (x - x*)^T Y f(x)) from L(x0) to target.
TraceResult lyapunov_trace(const VectorField& f, const QuadraticForm& q, const Vec& x0, double target,
                           const TraceOptions& opts = {});

/// Slopes s of the lines y = s x on which the 2x2 form vanishes.
std::vector<double> zero_level_slopes(const Mat& y);

}  // namespace lyap
