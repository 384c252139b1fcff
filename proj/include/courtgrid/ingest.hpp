#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtgrid/common.hpp"

namespace courtgrid {

/// One tracking frame as produced by an upstream converter.
struct TrackingFrame {
  std::string game_id;
  int quarter = 1;  // 1..4
  double timestamp_s = 0.0;
  int ballhandler_id = 0;
  Vec2 bh_pos;
  Vec2 basket_pos;
  std::vector<Vec2> defenders;
};

struct ShotEvent {
  int player = 0;
  std::string game_id;
  int quarter = 1;
  double timestamp_s = 0.0;
};

/// A frame with its shoot-within-horizon label. `player` is the dense index
/// once the sample has gone through parse_samples.
struct LabeledSample {
  std::string game_id;
  int quarter = 1;
  double t = 0.0;
  int player = 0;
  Vec2 bh;
  Vec2 basket;
  std::vector<Vec2> defenders;
  int label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

/// Dense player index <-> raw provider id.
class PlayerMap {
 public:
  PlayerMap() = default;
  explicit PlayerMap(std::vector<std::int64_t> raw_ids);

  /// Returns the dense index, inserting the id if unseen.
  int intern(std::int64_t raw);
  std::optional<int> find(std::int64_t raw) const;
  std::int64_t raw(int dense) const;
  int size() const noexcept { return static_cast<int>(raw_.size()); }
  const std::vector<std::int64_t>& raw_ids() const noexcept { return raw_; }

  /// Identity map 0..n-1.
  static PlayerMap identity(int n);

  friend bool operator==(const PlayerMap& a, const PlayerMap& b) { return a.raw_ == b.raw_; }

 private:
  std::vector<std::int64_t> raw_;
};

struct SampleSet {
  std::vector<LabeledSample> samples;
  PlayerMap players;
};

/// Reads canonical JSONL (one sample per line). Player ids are densified to
/// 0..I-1 in ascending raw-id order.
SampleSet parse_samples(const std::filesystem::path& path);
SampleSet parse_samples(std::istream& in);

/// Writes canonical JSONL with raw player ids restored.
void write_samples(std::ostream& out, const SampleSet& set);
void write_samples(const std::filesystem::path& path, const SampleSet& set);

/// Labels each frame 1 iff its ball-handler shoots in the same game and
/// quarter within (t, t + horizon_s]. Both inputs must be sorted by
/// (game_id, quarter, timestamp_s).
std::vector<LabeledSample> label_frames(std::span<const TrackingFrame> frames,
                                        std::span<const ShotEvent> shots,
                                        double horizon_s = 1.0);

struct DatasetSplit {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> validation;
  std::vector<LabeledSample> test;
  std::uint64_t seed = 0;
};

DatasetSplit split_dataset(std::span<const LabeledSample> samples,
                           std::array<double, 3> ratios, std::uint64_t seed);

inline constexpr int kPlayTypes = 11;
inline constexpr int kSynergyFeatures = 2 * kPlayTypes + 1;

/// Features in column order freq_1..freq_11, ppp_1..ppp_11, volume.
struct SynergyRow {
  std::int64_t player = 0;
  std::array<double, kSynergyFeatures> features{};
};

std::vector<SynergyRow> parse_synergy_table(const std::filesystem::path& path);
std::vector<SynergyRow> parse_synergy_table(std::istream& in);

/// The canonical synergy header: player,freq_1..freq_11,ppp_1..ppp_11,volume.
std::vector<std::string> synergy_header();

}  // namespace courtgrid
