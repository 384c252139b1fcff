#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "courtgrid/ingest.hpp"
#include "courtgrid/model.hpp"
#include "courtgrid/trainer.hpp"

namespace courtgrid {

/// A trained low-rank model plus what is needed to apply it to raw samples.
struct ModelBundle {
  PipelineVariant variant = PipelineVariant::base;
  LowRankModel model;
  PlayerMap players;
  double threshold = 0.5;
  EncodingGeometry geometry;
  /// Dense player -> cluster (playstyle variants only).
  std::vector<int> player_clusters;
  std::vector<std::string> context_names;
  std::string config_fingerprint;

  ContextSource contexts() const;
};

/// JSON document, format "courtgrid-model" version 1. Doubles are written in
/// shortest round-trip form so load(save(m)) == m exactly.
std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_model(const std::filesystem::path& path);

bool operator==(const LowRankModel& a, const LowRankModel& b);

}  // namespace courtgrid
