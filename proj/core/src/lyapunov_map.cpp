#include "lyap/lyapunov_map.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lyap/parallel.hpp"

namespace lyap {

MapModel make_map_model(const SmoothMap& map) {
  MapModel m;
  m.name = map.name();
  m.dimension = map.dimension();
  m.evaluate = [map](const IntervalVector& x, bool jac) {
    MapEvaluation e;
    e.image = map(x);
    if (jac) e.jacobian = map.jacobian(x);
    return e;
  };
  m.derivative = [map](const Vec& x) { return map.jacobian(x); };
  return m;
}

MapModel make_map_model(const PoincareMap& map) {
  MapModel m;
  m.name = map.field().name() + "_poincare";
  m.dimension = map.dimension();
  m.evaluate = [map](const IntervalVector& s, bool jac) {
    ReturnEnclosure r = map.map(s, jac ? IntegrationMode::C1 : IntegrationMode::C0);
    MapEvaluation e;
    e.image = r.section_state;
    if (jac) e.jacobian = r.dp;
    return e;
  };
  m.derivative = [map](const Vec& s) { return map.reference_return_c1(map.section().embed(s)).dp; };
  return m;
}

MapQuadraticForm build_quadratic_map(const MapModel& map, const Vec& center, const MWeights& m) {
  if (static_cast<std::size_t>(center.size()) != map.dimension)
    throw UsageError("build_quadratic_map: center dimension mismatch");
  SpectralData s = eig_decompose(map.derivative(center));
  s.signs = map_signs(s.eigenvalues);
  return quadratic_from_spectrum(s, center, m);
}

PairwiseResult stage1_map_pairwise(const MapModel& map, const MapQuadraticForm& q, const Grid& grid,
                                   const PairwiseOptions& opts) {
  if (grid.dimension() != map.dimension) throw UsageError("stage1_map_pairwise: grid dimension mismatch");
  PairwiseResult res;
  const std::size_t k = grid.size();
  res.cells = k;
  if (k > opts.budget / k)
    throw UsageError(fmt::format("stage1_map_pairwise: {} cells give {} pairs, above the budget of {}; "
                                 "use a coarser grid or split the domain",
                                 k, static_cast<double>(k) * static_cast<double>(k), opts.budget));
  res.pairs = k * k;
  if (!q.center_box.size() || !grid.bounds().contains(q.center_box)) {
    res.message = "center not inside the grid bounds";
    return res;
  }

  std::vector<IntervalMatrix> jac(k);
  std::vector<std::string> errors(k);
  parallel_for(k, opts.threads, [&](std::size_t i) {
    try {
      jac[i] = *map.evaluate(grid.cell(i), true).jacobian;
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < k; ++i)
    if (!errors[i].empty()) {
      res.error = true;
      res.message = fmt::format("derivative enclosure failed on cell {}: {}", i, errors[i]);
      return res;
    }

  // Pair (i, j) with i <= j, enumerated row by row.
  const std::size_t npairs = k * (k + 1) / 2;
  std::vector<std::size_t> row_start(k);
  for (std::size_t i = 0, s = 0; i < k; ++i) {
    row_start[i] = s;
    s += k - i;
  }
  std::vector<char> ok(npairs, 0);
  const IntervalMatrix yi = IntervalMatrix::point(q.y);
  const std::size_t n = map.dimension;
  parallel_for(k, opts.threads, [&](std::size_t i) {
    IntervalMatrix jit = jac[i].transpose();
    for (std::size_t j = i; j < k; ++j) {
      IntervalMatrix p = mat_mul(jit, mat_mul(q.y, jac[j]));
      IntervalMatrix b(n, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r; c < n; ++c) {
          Interval v = (p(r, c) + p(c, r)) * 0.5 - yi(r, c);
          b(r, c) = v;
          b(c, r) = v;
        }
      bool pass = false;
      try {
        pass = verify_negdef(b, opts.method);
      } catch (const NumericalError&) {
        pass = false;
      }
      ok[row_start[i] + (j - i)] = pass ? 1 : 0;
    }
  });
  res.evaluated = npairs;

  res.log.reserve(k * k);
  res.row_verified.assign(k, true);
  std::size_t failures = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t a = std::min(i, j), b = std::max(i, j);
      bool pass = ok[row_start[a] + (b - a)] != 0;
      if (!pass) {
        ++failures;
        res.row_verified[i] = false;
      }
      res.log.push_back({i, j, pass});
    }
  res.verified = failures == 0;
  res.message = res.verified ? fmt::format("all {} pairs negative definite", k * k)
                             : fmt::format("{} of {} pairs not verified", failures, k * k);
  return res;
}

namespace {

Stage2MapResult stage2_single(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell) {
  Stage2MapResult res;
  MapEvaluation e = map.evaluate(cell, true);
  IntervalVector d = cell - q.center_box;
  IntervalVector pd = e.image - q.center_box;
  Interval naive = quad_form(pd, q.y) - quad_form(d, q.y);

  // h(m) + grad h(cell) . (cell - m), grad h = 2 Dpsi^T Y (psi - x*) - 2 Y (x - x*)
  Vec m = cell.mid();
  IntervalVector pm = IntervalVector::point(m);
  MapEvaluation em = map.evaluate(pm, false);
  Interval hm = quad_form(em.image - q.center_box, q.y) - quad_form(pm - q.center_box, q.y);
  IntervalVector grad = Interval(2.0) * (mat_vec(e.jacobian->transpose(), mat_vec(q.y, pd)) - mat_vec(q.y, d));
  Interval mv = hm + dot(grad, cell - m);

  auto both = intersect(naive, mv);
  res.difference = both ? *both : naive;
  res.outcome = res.difference.hi() < 0.0 ? Stage2Outcome::Pass : Stage2Outcome::Fail;
  return res;
}

std::optional<Interval> stage2_split(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell,
                                     int depth);

// Hull of the half-cell enclosures when both halves pass, nullopt otherwise.
std::optional<Interval> stage2_halves(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell,
                                      int depth) {
  std::size_t axis = 0;
  for (std::size_t a = 1; a < cell.size(); ++a)
    if (cell[a].width() > cell[axis].width()) axis = a;
  if (cell[axis].is_point()) return std::nullopt;
  const double mid = cell[axis].mid();
  IntervalVector left = cell, right = cell;
  left[axis] = Interval(cell[axis].lo(), mid);
  right[axis] = Interval(mid, cell[axis].hi());
  auto a = stage2_split(map, q, left, depth);
  if (!a) return std::nullopt;
  auto b = stage2_split(map, q, right, depth);
  if (!b) return std::nullopt;
  return hull(*a, *b);
}

std::optional<Interval> stage2_split(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell,
                                     int depth) {
  Stage2MapResult r = stage2_single(map, q, cell);
  if (r.passed()) return r.difference;
  if (depth <= 0) return std::nullopt;
  return stage2_halves(map, q, cell, depth - 1);
}

}  // namespace

Stage2MapResult stage2_map(const MapModel& map, const MapQuadraticForm& q, const IntervalVector& cell,
                           int max_splits) {
  Stage2MapResult res;
  try {
    res = stage2_single(map, q, cell);
    if (!res.passed() && max_splits > 0) {
      if (auto pieces = stage2_halves(map, q, cell, max_splits - 1)) {
        res.difference = *pieces;
        res.outcome = Stage2Outcome::Pass;
      }
    }
  } catch (const DomainError& e) {
    res.outcome = Stage2Outcome::Fail;
    res.message = e.what();
  } catch (const Error& e) {
    res.outcome = Stage2Outcome::Error;
    res.message = e.what();
  }
  return res;
}

std::size_t MapSweepResult::count(Color c) const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [c](const CellVerdict& v) { return v.color() == c; }));
}

MapSweepResult sweep_map(const MapModel& map, const MapQuadraticForm& q, const Grid& grid,
                         const PairwiseOptions& opts) {
  MapSweepResult res;
  res.grid = grid;
  res.pairwise = stage1_map_pairwise(map, q, grid, opts);
  res.cells.resize(grid.size());
  res.stage2.resize(grid.size());
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    Stage2MapResult s = stage2_map(map, q, grid.cell(i), opts.stage2_splits);
    res.stage2[i] = s.outcome;
    res.cells[i].index = i;
    res.cells[i].stage1 = !res.pairwise.row_verified.empty() && res.pairwise.row_verified[i];
    res.cells[i].stage2 = s.passed();
  });
  return res;
}

}  // namespace lyap
