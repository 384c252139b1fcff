#include <random>

#include "doctest.h"

#include "courtgrid/serialize.hpp"
#include "fixtures.hpp"

using namespace courtgrid;

TEST_CASE("model bundles round-trip exactly") {
  std::mt19937_64 rng(1);
  for (auto [pv, v, c] : {std::tuple{PipelineVariant::base, Variant::base, 1},
                          std::tuple{PipelineVariant::st_playstyle, Variant::st, 7},
                          std::tuple{PipelineVariant::dynamic_quarter, Variant::dynamic, 4}}) {
    ModelBundle b;
    b.variant = pv;
    b.model = fixture::random_lowrank(v, {{4, 5}, {6, 6}, c}, 3, 2, rng);
    b.model.A(0, 0) = 0.1 + 0.2;  // not exactly representable in short decimal
    b.players = PlayerMap({5, 901, 77});
    b.threshold = 0.35;
    if (pv == PipelineVariant::st_playstyle) {
      b.player_clusters = {0, 6, 3};
      for (int k = 0; k < 7; ++k) b.context_names.push_back("c" + std::to_string(k));
    }
    b.config_fingerprint = "0123456789abcdef";
    const auto text = model_to_json(b);
    const auto back = model_from_json(text);
    CHECK(back.model == b.model);
    CHECK(back.players == b.players);
    CHECK(back.threshold == b.threshold);
    CHECK(back.variant == b.variant);
    CHECK(back.player_clusters == b.player_clusters);
    CHECK(back.context_names == b.context_names);
    CHECK(model_to_json(back) == text);

    fixture::TempDir dir("serialize");
    save_model(dir / "m.json", b);
    CHECK(load_model(dir / "m.json").model == b.model);
  }
}

TEST_CASE("model equality looks at every factor") {
  std::mt19937_64 rng(2);
  const auto m = fixture::random_lowrank(Variant::st, {{4, 5}, {6, 6}, 4}, 3, 2, rng);
  auto other = m;
  CHECK(other == m);
  other.B(1, 1) += 1e-15;
  CHECK_FALSE(other == m);
  other = m;
  other.bias = 0.5;
  CHECK_FALSE(other == m);
}

TEST_CASE("malformed model files are rejected") {
  CHECK_THROWS_AS(model_from_json("not json"), Error);
  CHECK_THROWS_AS(model_from_json(R"({"format":"something-else","version":1})"), Error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}
