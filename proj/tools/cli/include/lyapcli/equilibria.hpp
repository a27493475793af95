#pragma once

#include <vector>

#include "lyap/grid.hpp"
#include "lyap/krawczyk.hpp"
#include "lyap/systems.hpp"

namespace lyapcli {

struct EquilibriumSearch {
  /// Verified, pairwise distinct zeros, sorted by the first coordinate.
  std::vector<lyap::KrawczykResult> zeros;
  /// Grid cells where f may vanish but no verified zero accounts for it.
  std::vector<std::size_t> unresolved;
  /// Newton limits inside the box that failed verification.
  std::size_t failed_verifications = 0;
};

struct EquilibriumOptions {
  lyap::KrawczykOptions krawczyk;
  /// Bisection depth used to exclude zeros from a cell.
  int exclusion_depth = 24;
  unsigned threads = 0;
};

/// Newton from every cell midpoint, Krawczyk verification of each limit in
/// the search box, deduplication, then an exclusion pass over the cells.
EquilibriumSearch find_equilibria(const lyap::ExprSystem& f, const lyap::Grid& grid,
                                  const EquilibriumOptions& opts = {});

}  // namespace lyapcli
