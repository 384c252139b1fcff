#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "courtgrid/parallel.hpp"
#include "courtgrid/serialize.hpp"
#include "courtgrid/synth.hpp"
#include "courtgrid/trainer.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace courtgrid;

namespace {

// Coarse cell containing the center of a fine cell, in floating point.
int center_parent(int cell, GridShape coarse, GridShape fine) {
  const double cy = (cell / fine.cols + 0.5) * coarse.rows / fine.rows;
  const double cx = (cell % fine.cols + 0.5) * coarse.cols / fine.cols;
  return static_cast<int>(std::floor(cy)) * coarse.cols + static_cast<int>(std::floor(cx));
}

DatasetSplit small_planted(std::uint64_t seed, int contexts, std::size_t n = 6000) {
  PlantedOptions po;
  po.players = 6;
  po.rank = 2;
  po.contexts = contexts;
  po.court = {4, 5};
  po.seed = seed;
  const auto spec = make_planted(po);
  return split_dataset(generate(spec, n, seed), {0.8, 0.1, 0.1}, seed);
}

Schedule small_schedule(Variant v, int contexts) {
  const int c = v == Variant::base ? 1 : contexts;
  Schedule s;
  s.full_rank = {{{2, 2}, {3, 3}, v == Variant::st ? 1 : c}, {{4, 5}, {6, 6}, c}};
  s.low_rank = {{{4, 5}, {6, 6}, c}, {{8, 10}, {6, 6}, c}};
  return s;
}

}  // namespace

TEST_CASE("finegraining preserves logits through non-divisible steps") {
  std::mt19937_64 rng(1);
  const Resolution from{{8, 10}, {6, 6}, 4}, to{{20, 25}, {12, 12}, 4};
  for (Variant v : {Variant::base, Variant::st, Variant::dynamic}) {
    Resolution a = from, b = to;
    if (v == Variant::base) a.contexts = b.contexts = 1;
    const auto full = fixture::random_full(v, a, 3, rng);
    const auto low = fixture::random_lowrank(v, a, 3, 2, rng);
    const auto ff = finegrain(full, b);
    const auto lf = finegrain(low, b);
    for (int n = 0; n < 300; ++n) {
      auto fine = oracle::random_encoding(rng, v, b, 3);
      // Keep defenders with distinct coarse parents so both encodings count the same cells.
      std::vector<int> kept, parents;
      for (int d : fine.defenders) {
        const int p = center_parent(d, a.defender, b.defender);
        if (std::find(parents.begin(), parents.end(), p) == parents.end()) {
          kept.push_back(d);
          parents.push_back(p);
        }
      }
      fine.defenders = kept;
      SampleEncoding coarse = fine;
      const int d1 = fine.court % b.court.cells();
      coarse.court = center_parent(d1, a.court, b.court);
      if (v == Variant::dynamic) coarse.court += fine.context * a.court.cells();
      coarse.defenders = parents;
      std::sort(coarse.defenders.begin(), coarse.defenders.end());
      CHECK(logit(ff, fine) == doctest::Approx(logit(full, coarse)).epsilon(1e-13));
      CHECK(logit(lf, fine) == doctest::Approx(logit(low, coarse)).epsilon(1e-13));
    }
  }
}

TEST_CASE("context finegraining copies the single context") {
  std::mt19937_64 rng(2);
  const Resolution one{{4, 5}, {6, 6}, 1}, seven{{4, 5}, {6, 6}, 7};
  const auto low = fixture::random_lowrank(Variant::st, one, 3, 2, rng);
  const auto lf = finegrain(low, seven);
  for (int t = 0; t < 7; ++t) CHECK(lf.B.row(t) == low.B.row(0));
  const auto full = fixture::random_full(Variant::st, one, 3, rng);
  const auto ff = finegrain(full, seven);
  for (int n = 0; n < 100; ++n) {
    auto e = oracle::random_encoding(rng, Variant::st, seven, 3);
    auto c = e;
    c.context = 0;
    CHECK(logit(ff, e) == logit(full, c));
  }
  CHECK_THROWS_AS(finegrain(lf, one), Error);
}

TEST_CASE("metrics match confusion counts") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> p(500);
  std::vector<int> y(500);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::round(u(rng) * 20) / 20;  // many exact ties with the threshold grid
    y[i] = u(rng) < p[i] ? 1 : 0;
  }
  for (double t : {0.05, 0.3, 0.5, 0.95}) {
    const auto m = evaluate_scores(p, y, t);
    const auto c = oracle::counts_at(p, y, t);
    CHECK(m.tp == c.tp);
    CHECK(m.fp == c.fp);
    CHECK(m.fn == c.fn);
    CHECK(m.tn == c.tn);
    CHECK(m.f1 == doctest::Approx(c.f1()));
  }
  CHECK_THROWS_AS(evaluate_scores(p, y, 0.0), Error);
}

TEST_CASE("threshold tuning picks the lowest grid point with the best F1") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(200);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = u(rng);
      y[i] = u(rng) < p[i] * p[i] ? 1 : 0;
    }
    double best = -1, best_t = 0;
    for (int k = 1; k <= 19; ++k) {
      const double f = oracle::counts_at(p, y, 0.05 * k).f1();
      if (f > best) best = f, best_t = 0.05 * k;
    }
    CHECK(tune_threshold_scores(p, y) == doctest::Approx(best_t));
  }
  // All-equal scores tie everywhere below them.
  std::vector<double> flat(10, 0.5);
  std::vector<int> lab(10, 1);
  CHECK(tune_threshold_scores(flat, lab) == doctest::Approx(0.05));
}

TEST_CASE("default schedules and their validation") {
  const auto s = Schedule::defaults(Variant::st, 4);
  CHECK(s.full_rank.front().contexts == 1);
  CHECK(s.full_rank.back().contexts == 4);
  CHECK(s.full_rank.back() == s.low_rank.front());
  CHECK(s.low_rank.back().court == GridShape{40, 50});
  CHECK_NOTHROW(s.validate(Variant::st));
  CHECK(Schedule::defaults(Variant::dynamic, 4).full_rank.front().contexts == 4);
  CHECK(Schedule::defaults(Variant::base, 4).low_rank.back().contexts == 1);

  auto bad = s;
  bad.low_rank.front().court = {20, 25};
  CHECK_THROWS_AS(bad.validate(Variant::st), Error);
  bad = s;
  std::swap(bad.low_rank[1], bad.low_rank[2]);
  CHECK_THROWS_AS(bad.validate(Variant::st), Error);
  CHECK_THROWS_AS(s.validate(Variant::base), Error);
}

TEST_CASE("context sources") {
  LabeledSample s;
  s.quarter = 3;
  s.player = 1;
  CHECK(ContextSource::none().context_of(s) == 0);
  CHECK(ContextSource::quarters().context_of(s) == 2);
  CHECK(ContextSource::quarters().count() == 4);
  const auto ps = ContextSource::playstyles({4, -1, 2}, 7);
  s.player = 0;
  CHECK(ps.context_of(s) == 4);
  s.player = 1;
  CHECK_THROWS_AS(ps.context_of(s), Error);
  std::vector<LabeledSample> v{s};
  CHECK_THROWS_AS(ps.check_covers(v), Error);
  CHECK(to_string(parse_pipeline_variant("dynamic_playstyle")) == "dynamic_playstyle");
  CHECK(model_variant(PipelineVariant::st_playstyle) == Variant::st);
  CHECK(uses_playstyle(PipelineVariant::dynamic_playstyle));
  CHECK_FALSE(uses_playstyle(PipelineVariant::dynamic_quarter));
}

TEST_CASE("encoding extends the court axis for dynamic models") {
  const auto split = small_planted(5, 4, 200);
  const Resolution res{{4, 5}, {6, 6}, 4};
  const auto src = ContextSource::quarters();
  const auto base = encode(split.train, Variant::base, {{4, 5}, {6, 6}, 1}, src, {});
  const auto dyn = encode(split.train, Variant::dynamic, res, src, {});
  const auto st = encode(split.train, Variant::st, res, src, {});
  for (std::size_t i = 0; i < dyn.size(); ++i) {
    CHECK(base[i].context == 0);
    CHECK(dyn[i].context == split.train[i].quarter - 1);
    CHECK(dyn[i].court == base[i].court + dyn[i].context * 20);
    CHECK(st[i].court == base[i].court);
    CHECK(st[i].defenders == base[i].defenders);
  }
}

TEST_CASE("training is deterministic and independent of the thread count") {
  for (PipelineVariant pv : {PipelineVariant::base, PipelineVariant::st_quarter, PipelineVariant::dynamic_quarter}) {
    const auto v = model_variant(pv);
    const auto split = small_planted(7, v == Variant::base ? 1 : 4);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.rank = 2;
    cfg.seed = 9;
    cfg.lambda = v == Variant::dynamic ? 1e-3 : 0.0;
    set_num_threads(1);
    const auto a = run_pipeline(split, 6, cfg, pv, small_schedule(v, 4));
    set_num_threads(3);
    const auto b = run_pipeline(split, 6, cfg, pv, small_schedule(v, 4));
    set_num_threads(1);
    CHECK(a.model == b.model);
    CHECK(a.report.metrics_csv() == b.report.metrics_csv());
    CHECK(a.report.to_json() == b.report.to_json());
    CHECK(a.threshold == b.threshold);
    CHECK(a.model.res == Resolution{{8, 10}, {6, 6}, v == Variant::base ? 1 : 4});
    CHECK(a.report.test.tp + a.report.test.fp + a.report.test.fn + a.report.test.tn ==
          static_cast<long>(split.test.size()));
  }
}

TEST_CASE("each stage keeps its best validation snapshot") {
  const auto split = small_planted(8, 1);
  TrainConfig cfg;
  cfg.max_epochs = 4;
  cfg.rank = 2;
  TrainReport report;
  TrainingData data{&split, ContextSource::none(), 6};
  const auto sched = small_schedule(Variant::base, 1);
  const auto full = train_full_rank(data, sched, cfg, Variant::base, &report);
  const auto enc = encode(split.validation, Variant::base, full.res, ContextSource::none(), cfg.geometry);
  double best = 1e300;
  for (const auto& e : report.epochs)
    if (e.res == full.res) best = std::min(best, e.val_loss);
  CHECK(mean_loss(full, enc) <= best + 1e-12);
  CHECK(report.metrics_csv().rfind("stage,resolution,epoch,train_loss,val_loss,lr\n", 0) == 0);
}

TEST_CASE("training configuration validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lr_decay = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.threshold = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(to_string(parse_optimizer("sgd")) == "sgd");
  CHECK_THROWS_AS(parse_optimizer("adam"), Error);
}
