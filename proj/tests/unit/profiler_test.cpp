#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "doctest.h"

#include "courtgrid/profiler.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace courtgrid;

TEST_CASE("profiles decompose the logit of base and ST models") {
  std::mt19937_64 rng(1);
  for (auto [v, c] : {std::pair{Variant::base, 1}, std::pair{Variant::st, 4}}) {
    const auto m = fixture::random_lowrank(v, {{4, 5}, {6, 6}, c}, 5, 4, rng);
    for (int n = 0; n < 200; ++n) {
      const auto e = oracle::random_encoding(rng, v, m.res, 5);
      CHECK(profile_logit(m, e) == doctest::Approx(oracle::lowrank_logit(m, e)).epsilon(1e-13));
    }
  }
  const auto dyn = fixture::random_lowrank(Variant::dynamic, {{4, 5}, {6, 6}, 4}, 5, 4, rng);
  CHECK_THROWS_AS(profile_logit(dyn, oracle::random_encoding(rng, Variant::dynamic, dyn.res, 5)), Error);
}

TEST_CASE("player profiles are weighted court columns ranked by |weight|") {
  std::mt19937_64 rng(2);
  const auto m = fixture::random_lowrank(Variant::st, {{4, 5}, {6, 6}, 4}, 5, 6, rng);
  const auto set = player_profiles(m, 3, 2, 4);
  REQUIRE(set.size() == 4);
  for (std::size_t i = 1; i < set.size(); ++i) CHECK(std::abs(set[i - 1].weight) >= std::abs(set[i].weight));
  for (const auto& hm : set) {
    const double w = m.A(3, hm.k) * m.B(2, hm.k);
    CHECK(hm.weight == doctest::Approx(w));
    CHECK(hm.context == 2);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 5; ++c) CHECK(hm.at(r, c) == doctest::Approx(w * m.C(r * 5 + c, hm.k)));
  }
  // Nothing outside the top 4 beats the last kept weight.
  double kept_min = std::abs(set.back().weight);
  for (int k = 0; k < 6; ++k) {
    bool kept = false;
    for (const auto& hm : set) kept = kept || hm.k == k;
    if (!kept) CHECK(std::abs(m.A(3, k) * m.B(2, k)) <= kept_min);
  }
  CHECK_THROWS_AS(player_profiles(m, 5, 0, 4), Error);
  CHECK_THROWS_AS(player_profiles(m, 0, 4, 4), Error);

  const auto general = general_heatmaps(m);
  CHECK(general.size() == 6);
  for (const auto& hm : general) CHECK(hm.weight == doctest::Approx(m.A.col(hm.k).mean() * m.B.col(hm.k).mean()));
}

TEST_CASE("dynamic models give one ranked set per context block") {
  std::mt19937_64 rng(3);
  const auto m = fixture::random_lowrank(Variant::dynamic, {{4, 5}, {6, 6}, 4}, 5, 3, rng);
  const auto sets = context_heatmaps(m, 1, 2);
  REQUIRE(sets.size() == 4);
  for (const auto& [f, set] : sets) {
    REQUIRE(set.size() == 2);
    for (const auto& hm : set) {
      CHECK(hm.block == f);
      CHECK(hm.weight == m.A(1, hm.k));
      CHECK(hm.at(1, 2) == m.C(f * 20 + 7, hm.k));
    }
  }
  CHECK_THROWS_AS(general_heatmaps(m), Error);
}

TEST_CASE("ties in |weight| keep ascending component order") {
  ProfileSet set(3);
  set[0].k = 2;
  set[0].weight = -1;
  set[1].k = 0;
  set[1].weight = 1;
  set[2].k = 1;
  set[2].weight = 3;
  sort_profiles(set);
  CHECK(set[0].k == 1);
  CHECK(set[1].k == 0);
  CHECK(set[2].k == 2);
}

TEST_CASE("heatmap csv and raster encodings") {
  Heatmap hm;
  hm.shape = {2, 3};
  hm.grid = {1.0, -2.0, 0.0, 0.5, 1.0 / 3.0, 2.0};
  const auto csv = heatmap_csv(hm);
  CHECK(csv == "1,-2,0\n0.5,0.333333333,2\n");
  const auto back = parse_heatmap_csv(csv);
  CHECK(back.shape == hm.shape);
  CHECK(back.grid[4] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK_THROWS_AS(parse_heatmap_csv("1,2\n3\n"), Error);

  const auto ppm = heatmap_ppm(hm, 2);
  const std::string header = "P6\n6 4\n255\n";
  REQUIRE(ppm.size() == header.size() + 6 * 4 * 3);
  CHECK(ppm.compare(0, header.size(), header) == 0);
  auto pixel = [&](int x, int y) {
    const auto o = header.size() + static_cast<std::size_t>((y * 6 + x) * 3);
    return std::array<unsigned char, 3>{static_cast<unsigned char>(ppm[o]), static_cast<unsigned char>(ppm[o + 1]),
                                        static_cast<unsigned char>(ppm[o + 2])};
  };
  CHECK(pixel(2, 0) == std::array<unsigned char, 3>{0, 0, 255});    // -2 is the peak: full blue
  CHECK(pixel(5, 3) == std::array<unsigned char, 3>{255, 0, 0});    // +2: full red
  CHECK(pixel(4, 1) == std::array<unsigned char, 3>{255, 255, 255});  // 0: white
  CHECK(pixel(0, 0) == diverging_color(0.5));

  CHECK(diverging_color(0.5) == std::array<unsigned char, 3>{255, 128, 128});
  CHECK(diverging_color(-7) == std::array<unsigned char, 3>{0, 0, 255});
  CHECK(heatmap_stem("st_quarter", "player17", "q2", 3) == "st_quarter_player17_q2_k3");
}

TEST_CASE("exports write the encoded bytes") {
  fixture::TempDir dir("profiler");
  Heatmap hm;
  hm.shape = {1, 2};
  hm.grid = {0.25, -1};
  export_heatmap(hm, dir / "a.csv", HeatmapFormat::csv);
  export_heatmap(hm, dir / "a.ppm", HeatmapFormat::raster, 3);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "a.csv") == heatmap_csv(hm));
  CHECK(slurp(dir / "a.ppm") == heatmap_ppm(hm, 3));
  hm.grid.pop_back();
  CHECK_THROWS_AS(export_heatmap(hm, dir / "b.csv", HeatmapFormat::csv), Error);
}
