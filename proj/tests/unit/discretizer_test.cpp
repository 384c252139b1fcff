#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"

#include "courtgrid/discretizer.hpp"

using namespace courtgrid;

TEST_CASE("court cells bin positions row-major from the baseline") {
  const CourtGeometry g;
  const GridShape res{4, 5};
  CHECK(court_cell({0, 0}, g, res) == 0);
  CHECK(court_cell({49.99, 0}, g, res) == 4);
  CHECK(court_cell({0, 46.99}, g, res) == 15);
  CHECK(court_cell({25, 23.5}, g, res) == 2 * 5 + 2);
  // Clamped at and beyond the edges.
  CHECK(court_cell({50, 47}, g, res) == 19);
  CHECK(court_cell({-3, -3}, g, res) == 0);
  CHECK(court_cell({80, 2}, g, res) == 4);
  CHECK_THROWS_AS(court_cell({std::nan(""), 1}, g, res), Error);
  CHECK_THROWS_AS(court_cell({1, std::numeric_limits<double>::infinity()}, g, res), Error);
}

TEST_CASE("court cells agree with a brute-force interval search") {
  const CourtGeometry g;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0, 50), uy(0, 47);
  for (GridShape res : {GridShape{4, 5}, GridShape{8, 10}, GridShape{20, 25}, GridShape{40, 50}}) {
    for (int n = 0; n < 500; ++n) {
      const Vec2 p{ux(rng), uy(rng)};
      int row = -1, col = -1;
      for (int r = 0; r < res.rows; ++r)
        if (p.y >= r * 47.0 / res.rows && p.y < (r + 1) * 47.0 / res.rows) row = r;
      for (int c = 0; c < res.cols; ++c)
        if (p.x >= c * 50.0 / res.cols && p.x < (c + 1) * 50.0 / res.cols) col = c;
      CHECK(court_cell(p, g, res) == row * res.cols + col);
    }
  }
}

TEST_CASE("offsets are expressed relative to the basket direction") {
  const Vec2 bh{25, 20}, basket{25, 5};  // basket straight "down" in court y
  auto o = orient_offset({0, -3}, bh, basket);
  CHECK(o.y == doctest::Approx(3));   // toward the basket is frontal
  CHECK(o.x == doctest::Approx(0));
  o = orient_offset({2, 0}, bh, basket);
  CHECK(std::abs(o.y) < 1e-12);
  CHECK(std::abs(o.x) == doctest::Approx(2));
  // Rotation preserves length.
  o = orient_offset({3, 4}, {10, 30}, {25, 5});
  CHECK(std::hypot(o.x, o.y) == doctest::Approx(5));
  CHECK_THROWS_AS(orient_offset({1, 1}, basket, basket), Error);
}

TEST_CASE("defender cells are sorted, unique and drop outsiders") {
  const auto spec = DefenderGridSpec::for_grid({12, 12});
  CHECK(spec.anchor_col == 6);
  CHECK(spec.anchor_row == 2);
  const auto six = DefenderGridSpec::for_grid({6, 6});
  CHECK(six.anchor_col == 3);
  CHECK(six.anchor_row == 1);

  const Vec2 bh{25, 25}, basket{25, 5};
  // On top of the ball-handler: the anchor cell.
  std::vector<Vec2> d{{25, 25}};
  CHECK(defender_cells(bh, basket, d, spec) == std::vector<int>{2 * 12 + 6});
  // Two defenders in one cell plus one far away.
  d = {{25, 24.5}, {25, 24.2}, {25, 100}};
  const auto cells = defender_cells(bh, basket, d, spec);
  CHECK(cells.size() == 1);
  // Two feet toward the basket is exactly one frontal row further.
  d = {{25, 23}};
  CHECK(defender_cells(bh, basket, d, spec) == std::vector<int>{3 * 12 + 6});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 50);
  for (int n = 0; n < 200; ++n) {
    std::vector<Vec2> many;
    for (int j = 0; j < 5; ++j) many.push_back({u(rng), u(rng)});
    const auto c = defender_cells(bh, basket, many, spec);
    CHECK(std::is_sorted(c.begin(), c.end()));
    CHECK(std::adjacent_find(c.begin(), c.end()) == c.end());
    for (int x : c) CHECK((x >= 0 && x < 144));
  }
}

TEST_CASE("extended court indices round-trip") {
  for (auto [cells, contexts] : {std::pair{20, 4}, std::pair{80, 7}, std::pair{2000, 1}}) {
    for (int f = 0; f < contexts; ++f) {
      for (int d1 = 0; d1 < cells; ++d1) {
        const int e = extend_cell(d1, f, cells, contexts);
        CHECK(e == d1 + f * cells);
        CHECK(decode_extended(e, cells, contexts) == std::pair{d1, f});
      }
    }
  }
  CHECK_THROWS_AS(extend_cell(20, 0, 20, 4), Error);
  CHECK_THROWS_AS(extend_cell(0, 4, 20, 4), Error);
  CHECK_THROWS_AS(decode_extended(80, 20, 4), Error);
}

TEST_CASE("finegrain map assigns each fine cell to the coarse cell containing its center") {
  const std::vector<std::pair<GridShape, GridShape>> pairs = {
      {{4, 5}, {8, 10}}, {{8, 10}, {20, 25}}, {{20, 25}, {40, 50}}, {{6, 6}, {12, 12}},
      {{3, 7}, {10, 11}}, {{5, 5}, {5, 5}}};
  for (const auto& [coarse, fine] : pairs) {
    const auto map = finegrain_map(coarse, fine);
    std::vector<int> count(static_cast<std::size_t>(coarse.cells()), 0);
    for (int cell = 0; cell < fine.cells(); ++cell) {
      // Center in unit coordinates, then the coarse interval containing it.
      const double cy = (cell / fine.cols + 0.5) / fine.rows;
      const double cx = (cell % fine.cols + 0.5) / fine.cols;
      int pr = -1, pc = -1;
      for (int r = 0; r < coarse.rows; ++r)
        if (cy * coarse.rows >= r && cy * coarse.rows < r + 1) pr = r;
      for (int c = 0; c < coarse.cols; ++c)
        if (cx * coarse.cols >= c && cx * coarse.cols < c + 1) pc = c;
      const int parent = map.parent[static_cast<std::size_t>(cell)];
      CHECK(parent == pr * coarse.cols + pc);
      ++count[static_cast<std::size_t>(parent)];
    }
    int total = 0;
    for (int p = 0; p < coarse.cells(); ++p) {
      const auto& ch = map.children[static_cast<std::size_t>(p)];
      CHECK(static_cast<int>(ch.size()) == count[static_cast<std::size_t>(p)]);
      CHECK(std::is_sorted(ch.begin(), ch.end()));
      for (int c : ch) CHECK(map.parent[static_cast<std::size_t>(c)] == p);
      total += static_cast<int>(ch.size());
    }
    CHECK(total == fine.cells());
  }
  CHECK_THROWS_AS(finegrain_map({8, 10}, {4, 5}), Error);
}
