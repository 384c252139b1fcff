#include "courtgrid/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

namespace courtgrid {

using ojson = nlohmann::ordered_json;

PlayerMap::PlayerMap(std::vector<std::int64_t> raw_ids) : raw_(std::move(raw_ids)) {}

int PlayerMap::intern(std::int64_t raw) {
  if (auto found = find(raw)) return *found;
  raw_.push_back(raw);
  return static_cast<int>(raw_.size()) - 1;
}

std::optional<int> PlayerMap::find(std::int64_t raw) const {
  const auto it = std::find(raw_.begin(), raw_.end(), raw);
  if (it == raw_.end()) return std::nullopt;
  return static_cast<int>(it - raw_.begin());
}

std::int64_t PlayerMap::raw(int dense) const {
  require(dense >= 0 && dense < size(), "player index " + std::to_string(dense) + " out of range");
  return raw_[static_cast<std::size_t>(dense)];
}

PlayerMap PlayerMap::identity(int n) {
  std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return PlayerMap(std::move(ids));
}

namespace {

const std::vector<std::string> kSampleKeys = {"game_id", "quarter", "t",         "player",
                                              "bh",      "basket",  "defenders", "label"};

Vec2 read_point(const ojson& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument(what + " must be a 2-array of numbers");
  }
  Vec2 p{j[0].get<double>(), j[1].get<double>()};
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument(what + " is not finite");
  }
  return p;
}

LabeledSample read_sample(const ojson& j, std::int64_t& raw_player) {
  if (!j.is_object()) throw std::invalid_argument("record is not a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kSampleKeys.begin(), kSampleKeys.end(), key) == kSampleKeys.end()) {
      throw std::invalid_argument("unknown field '" + key + "'");
    }
  }
  for (const auto& key : kSampleKeys) {
    if (!j.contains(key)) throw std::invalid_argument("missing field '" + key + "'");
  }
  LabeledSample s;
  if (!j["game_id"].is_string()) throw std::invalid_argument("game_id must be a string");
  s.game_id = j["game_id"].get<std::string>();
  if (!j["quarter"].is_number_integer()) throw std::invalid_argument("quarter must be an integer");
  s.quarter = j["quarter"].get<int>();
  if (s.quarter < 1 || s.quarter > 4) throw std::invalid_argument("quarter must be in 1..4");
  if (!j["t"].is_number()) throw std::invalid_argument("t must be a number");
  s.t = j["t"].get<double>();
  if (!std::isfinite(s.t) || s.t < 0) throw std::invalid_argument("t must be finite and >= 0");
  if (!j["player"].is_number_integer()) throw std::invalid_argument("player must be an integer");
  raw_player = j["player"].get<std::int64_t>();
  s.bh = read_point(j["bh"], "bh");
  s.basket = read_point(j["basket"], "basket");
  if (!j["defenders"].is_array()) throw std::invalid_argument("defenders must be an array");
  for (const auto& d : j["defenders"]) s.defenders.push_back(read_point(d, "defender"));
  if (!j["label"].is_number_integer()) throw std::invalid_argument("label must be 0 or 1");
  s.label = j["label"].get<int>();
  if (s.label != 0 && s.label != 1) throw std::invalid_argument("label must be 0 or 1");
  return s;
}

ojson point_json(Vec2 p) { return ojson::array({p.x, p.y}); }

}  // namespace

SampleSet parse_samples(std::istream& in) {
  SampleSet set;
  std::vector<std::int64_t> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::int64_t id = 0;
      set.samples.push_back(read_sample(ojson::parse(line), id));
      raw.push_back(id);
    } catch (const std::exception& e) {
      fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  // Dense ids follow ascending raw id.
  std::vector<std::int64_t> ids = raw;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    set.samples[k].player =
        static_cast<int>(std::lower_bound(ids.begin(), ids.end(), raw[k]) - ids.begin());
  }
  set.players = PlayerMap(std::move(ids));
  return set;
}

SampleSet parse_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return parse_samples(in);
}

void write_samples(std::ostream& out, const SampleSet& set) {
  for (const auto& s : set.samples) {
    ojson j;
    j["game_id"] = s.game_id;
    j["quarter"] = s.quarter;
    j["t"] = s.t;
    j["player"] = set.players.raw(s.player);
    j["bh"] = point_json(s.bh);
    j["basket"] = point_json(s.basket);
    j["defenders"] = ojson::array();
    for (const auto& d : s.defenders) j["defenders"].push_back(point_json(d));
    j["label"] = s.label;
    out << j.dump() << '\n';
  }
}

void write_samples(const std::filesystem::path& path, const SampleSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  write_samples(out, set);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::vector<LabeledSample> label_frames(std::span<const TrackingFrame> frames,
                                        std::span<const ShotEvent> shots, double horizon_s) {
  require(horizon_s > 0, "horizon_s must be positive");
  auto frame_key = [](const TrackingFrame& f) {
    return std::tie(f.game_id, f.quarter, f.timestamp_s);
  };
  auto shot_key = [](const ShotEvent& s) { return std::tie(s.game_id, s.quarter, s.timestamp_s); };
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frame_key(frames[i]) < frame_key(frames[i - 1])) {
      fail(ErrorKind::invalid_argument, "frames are not sorted at index " + std::to_string(i));
    }
  }
  for (std::size_t i = 1; i < shots.size(); ++i) {
    if (shot_key(shots[i]) < shot_key(shots[i - 1])) {
      fail(ErrorKind::invalid_argument, "shots are not sorted at index " + std::to_string(i));
    }
  }

  std::vector<LabeledSample> out;
  out.reserve(frames.size());
  // Shots strictly before the current frame's key never matter again.
  std::size_t first = 0;
  for (const auto& f : frames) {
    if (f.quarter < 1 || f.quarter > 4) fail(ErrorKind::invalid_argument, "quarter must be in 1..4");
    while (first < shots.size() && shot_key(shots[first]) <= frame_key(f)) ++first;
    int label = 0;
    for (std::size_t s = first; s < shots.size(); ++s) {
      const auto& shot = shots[s];
      if (shot.game_id != f.game_id || shot.quarter != f.quarter) break;
      if (shot.timestamp_s > f.timestamp_s + horizon_s) break;
      if (shot.player == f.ballhandler_id && shot.timestamp_s > f.timestamp_s) {
        label = 1;
        break;
      }
    }
    out.push_back(LabeledSample{f.game_id, f.quarter, f.timestamp_s, f.ballhandler_id, f.bh_pos,
                                f.basket_pos, f.defenders, label});
  }
  return out;
}

DatasetSplit split_dataset(std::span<const LabeledSample> samples, std::array<double, 3> ratios,
                           std::uint64_t seed) {
  for (double r : ratios) require(r > 0, "split ratios must be positive");
  require(std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) <= 1e-9, "split ratios must sum to 1");

  DatasetSplit split;
  split.seed = seed;
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = std::min<std::size_t>(n, std::llround(ratios[0] * static_cast<double>(n)));
  const auto n_val =
      std::min<std::size_t>(n - n_train, std::llround(ratios[1] * static_cast<double>(n)));
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = samples[order[k]];
    if (k < n_train) {
      split.train.push_back(s);
    } else if (k < n_train + n_val) {
      split.validation.push_back(s);
    } else {
      split.test.push_back(s);
    }
  }
  return split;
}

std::vector<std::string> synergy_header() {
  std::vector<std::string> h{"player"};
  for (int k = 1; k <= kPlayTypes; ++k) h.push_back("freq_" + std::to_string(k));
  for (int k = 1; k <= kPlayTypes; ++k) h.push_back("ppp_" + std::to_string(k));
  h.push_back("volume");
  return h;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& text, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::parse, where + ": '" + text + "' is not a finite number");
  }
}

}  // namespace

std::vector<SynergyRow> parse_synergy_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, "synergy table is empty");
  const auto header = split_csv(line);
  const auto expected = synergy_header();

  // column position in the file -> slot (-1 = player, 0..22 = feature)
  std::vector<int> slot(header.size(), -2);
  std::vector<bool> seen(expected.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto it = std::find(expected.begin(), expected.end(), header[c]);
    if (it == expected.end()) fail(ErrorKind::parse, "unknown synergy column '" + header[c] + "'");
    const auto idx = static_cast<std::size_t>(it - expected.begin());
    if (seen[idx]) fail(ErrorKind::parse, "duplicate synergy column '" + header[c] + "'");
    seen[idx] = true;
    slot[c] = static_cast<int>(idx) - 1;
  }
  for (std::size_t k = 0; k < expected.size(); ++k) {
    if (!seen[k]) fail(ErrorKind::parse, "synergy header is missing column '" + expected[k] + "'");
  }

  std::vector<SynergyRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    const auto player_col = static_cast<std::size_t>(
        std::find(slot.begin(), slot.end(), -1) - slot.begin());
    const std::string player_text =
        player_col < fields.size() ? fields[player_col] : std::string("?");
    if (fields.size() != header.size()) {
      fail(ErrorKind::parse, "synergy row for player " + player_text + " has " +
                                 std::to_string(static_cast<long>(fields.size()) - 1) +
                                 " features, expected " + std::to_string(kSynergyFeatures));
    }
    SynergyRow row;
    const std::string where = "synergy line " + std::to_string(line_no);
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (slot[c] == -1) {
        try {
          std::size_t used = 0;
          row.player = std::stoll(fields[c], &used);
          if (used != fields[c].size()) throw std::invalid_argument(fields[c]);
        } catch (const std::exception&) {
          fail(ErrorKind::parse, where + ": bad player id '" + fields[c] + "'");
        }
      } else {
        const auto k = static_cast<std::size_t>(slot[c]);
        row.features[k] = parse_real(fields[c], where);
      }
    }
    for (int k = 0; k < kSynergyFeatures; ++k) {
      const double v = row.features[static_cast<std::size_t>(k)];
      const bool ok = k < kPlayTypes ? (v >= 0.0 && v <= 1.0) : v >= 0.0;
      if (!ok) {
        fail(ErrorKind::parse, "synergy row for player " + std::to_string(row.player) +
                                   ": column " + expected[static_cast<std::size_t>(k) + 1] +
                                   " out of range");
      }
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<SynergyRow> parse_synergy_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return parse_synergy_table(in);
}

}  // namespace courtgrid
