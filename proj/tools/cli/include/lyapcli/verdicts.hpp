#pragma once

#include <string>
#include <vector>

#include "lyap/grid.hpp"
#include "lyap/interval.hpp"

namespace lyapcli {

struct VerdictRow {
  std::size_t index = 0;
  lyap::IntervalVector cell;
  bool stage1 = false;
  bool stage2 = false;
  lyap::Color color = lyap::Color::Red;
};

struct VerdictTable {
  std::size_t dimension = 0;
  std::vector<VerdictRow> rows;

  static VerdictTable from_grid(const lyap::Grid& grid, const std::vector<lyap::CellVerdict>& cells);
  /// Hull of all cells.
  lyap::IntervalVector bounds() const;
};

/// Header `cell_index,axis0_lo,axis0_hi,...,stage1,stage2,color`; bounds in
/// shortest round-trip decimal.
std::string write_csv(const VerdictTable& table);
/// Inverse of write_csv. Throws UsageError with a line number on bad input.
VerdictTable parse_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace lyapcli
