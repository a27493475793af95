#pragma once

/**
 * @file lyapunov_map.hpp
 * @brief Quadratic Lyapunov functions for maps: B(x) = Dpsi^T Y Dpsi - Y
 * certified by the pairwise interval algorithm, and the direct descent
 * check L(psi(x)) < L(x).
 */

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lyap/grid.hpp"
#include "lyap/lyapunov_flow.hpp"
#include "lyap/poincare.hpp"
#include "lyap/systems.hpp"

namespace lyap {

/// Same data as the flow form; signs follow |lambda| < 1 (+) / > 1 (-).
using MapQuadraticForm = QuadraticForm;

struct MapEvaluation {
  IntervalVector image;
  std::optional<IntervalMatrix> jacobian;
};

/// A map in a fixed coordinate system (explicit maps: the state space;
/// Poincare maps: the section chart).
struct MapModel {
  std::string name;
  std::size_t dimension = 0;
  /// Enclosures of psi(box) and, when requested, Dpsi(box). May throw
  /// PoincareError / IntegrationError.
  std::function<MapEvaluation(const IntervalVector&, bool)> evaluate;
  /// Float derivative at a point.
  std::function<Mat(const Vec&)> derivative;
};

MapModel make_map_model(const SmoothMap& map);
MapModel make_map_model(const PoincareMap& map);

MapQuadraticForm build_quadratic_map(const MapModel& map, const Vec& center, const MWeights& m = {});

struct PairLog {
  std::size_t k = 0;
  std::size_t k2 = 0;
  bool negative_definite = false;
};

struct PairwiseOptions {
  unsigned threads = 0;
  /// Refuse when K^2 exceeds this.
  std::size_t budget = 10000;
  NegDefMethod method = NegDefMethod::Gershgorin;
  /// Bisection depth sweep_map allows stage 2 on a failing cell.
  int stage2_splits = 4;
};

struct PairwiseResult {
  bool verified = false;
  /// Some Dpsi enclosure could not be computed.
  bool error = false;
  std::size_t cells = 0;
  /// K^2 ordered pairs covered by the certificate.
  std::size_t pairs = 0;
  /// Distinct interval matrices checked; (k, k') and (k', k) give the same
  /// symmetrized set.
  std::size_t evaluated = 0;
  /// One entry per ordered pair (k, k').
  std::vector<PairLog> log;
  /// Cell k has all pairs (k, k') verified.
  std::vector<bool> row_verified;
  std::string message;
};

/// Negative definiteness of sym(Dpsi(D_k)^T Y Dpsi(D_k')) - Y for all
/// ordered pairs of grid cells.
PairwiseResult stage1_map_pairwise(const MapModel& map, const MapQuadraticForm& q, const Grid& grid,
                                   const PairwiseOptions& opts = {});

enum class Stage2Outcome { Pass, Fail, Error };

struct Stage2MapResult {
  Stage2Outcome outcome = Stage2Outcome::Fail;
  /// Enclosure of L(psi(x)) - L(x) over the cell (Pass / Fail).
  Interval difference;
  std::string message;
  bool passed() const { return outcome == Stage2Outcome::Pass; }
};

/// L(psi(cell)) - L(cell) < 0, from the naive enclosure intersected with a
/// mean-value form. A failing cell is bisected along its widest axis, up to
/// max_splits levels, and passes when every piece does.
Stage2MapResult stage2_map(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell,
                           int max_splits = 4);

struct MapSweepResult {
  Grid grid;
  PairwiseResult pairwise;
  /// Per cell, stage1 means the cell's row of pairs passed; the domain
  /// certificate is pairwise.verified.
  std::vector<CellVerdict> cells;
  std::vector<Stage2Outcome> stage2;
  std::size_t count(Color c) const;
};

MapSweepResult sweep_map(const MapModel& map, const MapQuadraticForm& q, const Grid& grid,
                         const PairwiseOptions& opts = {});

}  // namespace lyap
