#pragma once

#include <span>
#include <utility>
#include <vector>

#include "courtgrid/common.hpp"

namespace courtgrid {

/// Physical half-court extent in feet.
struct CourtGeometry {
  double depth_ft = 47.0;  // baseline to half-court
  double width_ft = 50.0;  // sideline to sideline
};

/// Egocentric defender grid around the ball-handler. Rows run along the
/// ball-handler -> basket direction ("frontal"), columns across it.
struct DefenderGridSpec {
  GridShape grid{12, 12};
  int anchor_col = 6;
  int anchor_row = 2;
  double frontal_ft = 24.0;
  double lateral_ft = 24.0;

  /// Anchor scaled from (6,2) at 12x12 by integer division, e.g. (3,1) at 6x6.
  static DefenderGridSpec for_grid(GridShape grid, double frontal_ft = 24.0,
                                   double lateral_ft = 24.0);
};

/// Cell index row*cols + col of a court position; coordinates are clamped to
/// the court. Throws on non-finite input.
int court_cell(Vec2 pos, const CourtGeometry& geometry, GridShape res);

/// Offset (defender - bh) expressed as (lateral, frontal), where +frontal points
/// from the ball-handler toward the basket and +lateral is to its right.
Vec2 orient_offset(Vec2 offset, Vec2 bh, Vec2 basket);

/// Sorted, de-duplicated defender cells. Defenders outside the grid are dropped.
std::vector<int> defender_cells(Vec2 bh, Vec2 basket, std::span<const Vec2> defenders,
                                const DefenderGridSpec& spec);

/// Places court cell d1 on copy f of `contexts` side-by-side courts.
int extend_cell(int d1, int f, int court_cells, int contexts);

/// Inverse of extend_cell: returns (d1, f).
std::pair<int, int> decode_extended(int index, int court_cells, int contexts);

/// Parent/children relation between a coarse and a fine grid. Each fine cell's
/// parent is the coarse cell containing its center.
struct FinegrainMap {
  GridShape coarse;
  GridShape fine;
  std::vector<int> parent;                 // fine cell -> coarse cell
  std::vector<std::vector<int>> children;  // coarse cell -> fine cells, ascending
};

FinegrainMap finegrain_map(GridShape coarse, GridShape fine);

}  // namespace courtgrid
