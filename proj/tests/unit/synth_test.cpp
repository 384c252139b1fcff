#include <cmath>

#include "doctest.h"

#include "courtgrid/synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace courtgrid;

TEST_CASE("planted factors have the requested shapes and block correlation") {
  PlantedOptions po;
  po.players = 7;
  po.rank = 4;
  po.contexts = 4;
  po.court = {40, 50};
  po.rho = 0.3;
  po.seed = 11;
  const auto spec = make_planted(po);
  CHECK(spec.A.rows() == 7);
  CHECK(spec.C.rows() == 4 * 2000);
  CHECK(spec.D.rows() == 36);
  CHECK(spec.variant() == Variant::dynamic);
  // Sample correlation between blocks 0 and 3 over 2000 x 4 entries.
  const Eigen::MatrixXd b0 = spec.C.topRows(2000), b3 = spec.C.bottomRows(2000);
  const Eigen::ArrayXd x = Eigen::Map<const Eigen::VectorXd>(b0.data(), b0.size()).array();
  const Eigen::ArrayXd y = Eigen::Map<const Eigen::VectorXd>(b3.data(), b3.size()).array();
  const double cxy = ((x - x.mean()) * (y - y.mean())).mean();
  const double corr = cxy / std::sqrt((x - x.mean()).square().mean() * (y - y.mean()).square().mean());
  CHECK(corr == doctest::Approx(0.3).epsilon(0.1));
  po.rho = 1.5;
  CHECK_THROWS_AS(make_planted(po), Error);
}

TEST_CASE("the oracle is the planted model applied to the encoded sample") {
  for (int contexts : {1, 4}) {
    PlantedOptions po;
    po.contexts = contexts;
    po.seed = 3;
    const auto spec = make_planted(po);
    const auto samples = generate(spec, 500, 4);
    const auto model = planted_model(spec);
    const auto src = contexts == 1 ? ContextSource::none() : ContextSource::quarters();
    const auto enc = encode(samples, spec.variant(), spec.resolution(), src, spec.geometry);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      CHECK(bayes_oracle(spec, samples[i]) == doctest::Approx(sigmoid(oracle::lowrank_logit(model, enc[i]))));
      CHECK(!enc[i].defenders.empty());
      CHECK(enc[i].defenders.size() <= 3);
    }
  }
}

TEST_CASE("generation is seeded and labels follow the oracle") {
  PlantedOptions po;
  po.seed = 8;
  const auto spec = make_planted(po);
  const auto a = generate(spec, 20000, 1);
  CHECK(a == generate(spec, 20000, 1));
  CHECK_FALSE(a == generate(spec, 20000, 2));
  double expected = 0, observed = 0;
  for (const auto& s : a) {
    expected += bayes_oracle(spec, s);
    observed += s.label;
  }
  // Binomial standard deviation is below sqrt(n)/2 = 71.
  CHECK(std::abs(expected - observed) < 5 * 71);
}

TEST_CASE("planted specs round-trip through JSON exactly") {
  PlantedOptions po;
  po.contexts = 4;
  po.seed = 9;
  const auto spec = make_planted(po);
  const auto back = planted_from_json(planted_to_json(spec));
  CHECK(back.A == spec.A);
  CHECK(back.C == spec.C);
  CHECK(back.D == spec.D);
  CHECK(back.bias == spec.bias);
  CHECK(back.court == spec.court);
  CHECK(back.contexts == 4);
  CHECK(planted_to_json(back) == planted_to_json(spec));
  fixture::TempDir dir("synth");
  write_planted(dir / "spec.json", spec);
  CHECK(read_planted(dir / "spec.json").C == spec.C);
  CHECK_THROWS_AS(planted_from_json("{}"), Error);
}
