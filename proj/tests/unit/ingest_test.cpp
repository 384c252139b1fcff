#include <algorithm>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "doctest.h"

#include "courtgrid/ingest.hpp"

using namespace courtgrid;

namespace {

const char* kTwoSamples =
    R"({"game_id":"g1","quarter":2,"t":10.5,"player":907,"bh":[20,30],"basket":[25,5.25],"defenders":[[21,28],[18,29]],"label":1})"
    "\n"
    R"({"game_id":"g1","quarter":2,"t":11.0,"player":12,"bh":[10,12],"basket":[25,5.25],"defenders":[],"label":0})"
    "\n";

}  // namespace

TEST_CASE("samples parse with densified ascending player ids") {
  std::istringstream in(kTwoSamples);
  const auto set = parse_samples(in);
  REQUIRE(set.samples.size() == 2);
  CHECK(set.players.size() == 2);
  CHECK(set.players.raw(0) == 12);
  CHECK(set.players.raw(1) == 907);
  CHECK(set.samples[0].player == 1);
  CHECK(set.samples[1].player == 0);
  CHECK(set.samples[0].defenders.size() == 2);
  CHECK(set.samples[0].basket == Vec2{25, 5.25});
  CHECK(set.samples[0].label == 1);
}

TEST_CASE("samples survive a write/parse round trip") {
  std::istringstream in(kTwoSamples);
  const auto set = parse_samples(in);
  std::ostringstream out;
  write_samples(out, set);
  std::istringstream back(out.str());
  const auto again = parse_samples(back);
  CHECK(again.samples == set.samples);
  CHECK(again.players == set.players);
}

TEST_CASE("malformed sample lines are rejected") {
  const std::vector<std::string> bad = {
      R"({"game_id":"g","quarter":1,"t":0,"player":1,"bh":[1,2],"basket":[25,5],"defenders":[]})",
      R"({"game_id":"g","quarter":1,"t":0,"player":1,"bh":[1],"basket":[25,5],"defenders":[],"label":0})",
      R"({"game_id":"g","quarter":1,"t":0,"player":1,"bh":[1,2],"basket":[25,5],"defenders":[],"label":0,"x":1})",
      R"({"game_id":7,"quarter":1,"t":0,"player":1,"bh":[1,2],"basket":[25,5],"defenders":[],"label":0})",
      "not json"};
  for (const auto& line : bad) {
    std::istringstream in(line + "\n");
    CHECK_THROWS_AS(parse_samples(in), Error);
  }
}

TEST_CASE("player maps intern and look up") {
  PlayerMap m;
  CHECK(m.intern(50) == 0);
  CHECK(m.intern(7) == 1);
  CHECK(m.intern(50) == 0);
  CHECK(m.find(7) == 1);
  CHECK_FALSE(m.find(8).has_value());
  CHECK(PlayerMap::identity(3).raw(2) == 2);
}

TEST_CASE("frame labels match a brute-force horizon scan") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> player(1, 4), quarter(1, 4), game(0, 1);
  std::uniform_real_distribution<double> time(0, 30);
  std::vector<TrackingFrame> frames;
  std::vector<ShotEvent> shots;
  for (int n = 0; n < 400; ++n) {
    TrackingFrame f;
    f.game_id = "g" + std::to_string(game(rng));
    f.quarter = quarter(rng);
    f.timestamp_s = std::round(time(rng) * 4) / 4;  // quarter-second grid creates exact ties
    f.ballhandler_id = player(rng);
    f.bh_pos = {10, 10};
    f.basket_pos = {25, 5.25};
    frames.push_back(f);
  }
  for (int n = 0; n < 60; ++n) {
    shots.push_back({player(rng), "g" + std::to_string(game(rng)), quarter(rng),
                     std::round(time(rng) * 4) / 4});
  }
  auto fk = [](const TrackingFrame& f) { return std::tie(f.game_id, f.quarter, f.timestamp_s); };
  auto sk = [](const ShotEvent& s) { return std::tie(s.game_id, s.quarter, s.timestamp_s); };
  std::stable_sort(frames.begin(), frames.end(), [&](auto& a, auto& b) { return fk(a) < fk(b); });
  std::stable_sort(shots.begin(), shots.end(), [&](auto& a, auto& b) { return sk(a) < sk(b); });

  const auto labeled = label_frames(frames, shots, 1.0);
  REQUIRE(labeled.size() == frames.size());
  int positives = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    int expect = 0;
    for (const auto& s : shots) {
      if (s.game_id == f.game_id && s.quarter == f.quarter && s.player == f.ballhandler_id &&
          s.timestamp_s > f.timestamp_s && s.timestamp_s <= f.timestamp_s + 1.0)
        expect = 1;
    }
    CHECK(labeled[i].label == expect);
    positives += expect;
  }
  CHECK(positives > 0);

  std::vector<TrackingFrame> unsorted = {frames[5], frames[0]};
  if (fk(frames[5]) != fk(frames[0])) CHECK_THROWS_AS(label_frames(unsorted, shots, 1.0), Error);
}

TEST_CASE("dataset splits partition the samples deterministically") {
  std::vector<LabeledSample> samples(1003);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].t = static_cast<double>(i);
  const auto a = split_dataset(samples, {0.8, 0.1, 0.1}, 42);
  const auto b = split_dataset(samples, {0.8, 0.1, 0.1}, 42);
  const auto c = split_dataset(samples, {0.8, 0.1, 0.1}, 43);
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK_FALSE(a.train == c.train);
  CHECK(a.train.size() == 802);
  CHECK(a.validation.size() == 100);
  CHECK(a.test.size() == 101);
  std::set<double> seen;
  for (const auto* part : {&a.train, &a.validation, &a.test})
    for (const auto& s : *part) seen.insert(s.t);
  CHECK(seen.size() == samples.size());
  CHECK_THROWS_AS(split_dataset(samples, {0.8, 0.1, 0.2}, 1), Error);
  CHECK_THROWS_AS(split_dataset(samples, {1.0, 0.0, 0.0}, 1), Error);
}

TEST_CASE("synergy tables accept any column order") {
  auto header = synergy_header();
  CHECK(header.size() == 24);
  CHECK(header.front() == "player");
  CHECK(header.back() == "volume");
  std::reverse(header.begin(), header.end());
  std::ostringstream text;
  for (std::size_t c = 0; c < header.size(); ++c) text << (c ? "," : "") << header[c];
  text << "\n";
  // Reversed order: volume, ppp_11..ppp_1, freq_11..freq_1, player.
  text << "500";
  for (int k = 11; k >= 1; --k) text << "," << 0.8 + k / 100.0;
  for (int k = 11; k >= 1; --k) text << "," << k / 100.0;
  text << ",77\n";
  std::istringstream in(text.str());
  const auto rows = parse_synergy_table(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].player == 77);
  CHECK(rows[0].features[0] == doctest::Approx(0.01));
  CHECK(rows[0].features[10] == doctest::Approx(0.11));
  CHECK(rows[0].features[11] == doctest::Approx(0.81));
  CHECK(rows[0].features[22] == doctest::Approx(500));

  std::istringstream missing("player,freq_1\n1,0.5\n");
  CHECK_THROWS_AS(parse_synergy_table(missing), Error);
}
