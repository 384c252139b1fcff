#include "courtgrid/discretizer.hpp"

#include <algorithm>
#include <cmath>

namespace courtgrid {

DefenderGridSpec DefenderGridSpec::for_grid(GridShape grid, double frontal_ft, double lateral_ft) {
  require(grid.rows > 0 && grid.cols > 0, "defender grid must be non-empty");
  DefenderGridSpec spec;
  spec.grid = grid;
  spec.anchor_col = 6 * grid.cols / 12;
  spec.anchor_row = 2 * grid.rows / 12;
  spec.frontal_ft = frontal_ft;
  spec.lateral_ft = lateral_ft;
  return spec;
}

namespace {

int bin(double v, double extent, int bins) {
  const double clamped = std::clamp(v, 0.0, std::nextafter(extent, 0.0));
  const int b = static_cast<int>(std::floor(clamped / extent * bins));
  return std::clamp(b, 0, bins - 1);
}

}  // namespace

int court_cell(Vec2 pos, const CourtGeometry& geometry, GridShape res) {
  if (!std::isfinite(pos.x) || !std::isfinite(pos.y)) {
    fail(ErrorKind::invalid_argument, "court position is not finite");
  }
  require(geometry.depth_ft > 0 && geometry.width_ft > 0, "court geometry must be positive");
  require(res.rows > 0 && res.cols > 0, "court resolution must be positive");
  const int row = bin(pos.y, geometry.depth_ft, res.rows);
  const int col = bin(pos.x, geometry.width_ft, res.cols);
  return row * res.cols + col;
}

Vec2 orient_offset(Vec2 offset, Vec2 bh, Vec2 basket) {
  const double dx = basket.x - bh.x;
  const double dy = basket.y - bh.y;
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) fail(ErrorKind::invalid_argument, "ball-handler is at the basket");
  const double ux = dx / len;
  const double uy = dy / len;
  // Right-hand perpendicular of u.
  const double frontal = offset.x * ux + offset.y * uy;
  const double lateral = offset.x * uy - offset.y * ux;
  return {lateral, frontal};
}

std::vector<int> defender_cells(Vec2 bh, Vec2 basket, std::span<const Vec2> defenders,
                                const DefenderGridSpec& spec) {
  const auto& g = spec.grid;
  require(spec.anchor_row >= 0 && spec.anchor_row < g.rows && spec.anchor_col >= 0 &&
              spec.anchor_col < g.cols,
          "defender grid anchor outside grid");
  const double cell_h = spec.frontal_ft / g.rows;
  const double cell_w = spec.lateral_ft / g.cols;
  // Snap round-off so on-axis defenders keep the anchor column/row.
  const double snap = 1e-9 * std::max(cell_h, cell_w);

  std::vector<int> cells;
  for (const auto& d : defenders) {
    if (!std::isfinite(d.x) || !std::isfinite(d.y)) {
      fail(ErrorKind::invalid_argument, "defender position is not finite");
    }
    auto [lateral, frontal] = orient_offset({d.x - bh.x, d.y - bh.y}, bh, basket);
    if (std::abs(lateral) < snap) lateral = 0.0;
    if (std::abs(frontal) < snap) frontal = 0.0;
    const double r = std::floor(frontal / cell_h) + spec.anchor_row;
    const double c = std::floor(lateral / cell_w) + spec.anchor_col;
    if (r < 0 || r >= g.rows || c < 0 || c >= g.cols) continue;
    cells.push_back(static_cast<int>(r) * g.cols + static_cast<int>(c));
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

int extend_cell(int d1, int f, int court_cells, int contexts) {
  require(court_cells > 0 && contexts > 0, "extend_cell: sizes must be positive");
  if (d1 < 0 || d1 >= court_cells) {
    fail(ErrorKind::invalid_argument, "court cell " + std::to_string(d1) + " out of range");
  }
  if (f < 0 || f >= contexts) {
    fail(ErrorKind::invalid_argument, "context value " + std::to_string(f) + " out of range");
  }
  return d1 + f * court_cells;
}

std::pair<int, int> decode_extended(int index, int court_cells, int contexts) {
  require(court_cells > 0 && contexts > 0, "decode_extended: sizes must be positive");
  if (index < 0 || index >= court_cells * contexts) {
    fail(ErrorKind::invalid_argument, "extended cell " + std::to_string(index) + " out of range");
  }
  return {index % court_cells, index / court_cells};
}

FinegrainMap finegrain_map(GridShape coarse, GridShape fine) {
  require(coarse.rows > 0 && coarse.cols > 0, "finegrain: coarse grid must be non-empty");
  require(fine.rows >= coarse.rows && fine.cols >= coarse.cols,
          "finegrain: " + fine.str() + " is not finer than " + coarse.str());
  FinegrainMap map{coarse, fine, std::vector<int>(static_cast<std::size_t>(fine.cells())),
                   std::vector<std::vector<int>>(static_cast<std::size_t>(coarse.cells()))};
  // Center of fine row r is (2r+1)/(2*fine.rows); integer arithmetic keeps it exact.
  for (int r = 0; r < fine.rows; ++r) {
    const int pr = (2 * r + 1) * coarse.rows / (2 * fine.rows);
    for (int c = 0; c < fine.cols; ++c) {
      const int pc = (2 * c + 1) * coarse.cols / (2 * fine.cols);
      const int child = r * fine.cols + c;
      const int parent = pr * coarse.cols + pc;
      map.parent[static_cast<std::size_t>(child)] = parent;
      map.children[static_cast<std::size_t>(parent)].push_back(child);
    }
  }
  return map;
}

}  // namespace courtgrid
