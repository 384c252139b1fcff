#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "courtgrid/trainer.hpp"

namespace courtgrid {

/// Everything a `train` run needs. Loaded from a sectioned key=value file,
/// then overridden key by key ("section.key" names).
struct RunConfig {
  PipelineVariant variant = PipelineVariant::base;
  TrainConfig train;
  bool lambda_set = false;
  int threads = 1;
  std::array<double, 3> split{0.8, 0.1, 0.1};
  int clusters = 7;
  std::optional<Schedule> schedule;
  std::string data_path;
  std::string clusters_path;
  std::string out_dir;

  /// Sets one key, e.g. set("train.epochs", "5"). Unknown keys throw.
  void set(std::string_view key, std::string_view value);
  /// Reads an INI-style file; every key must be known.
  void load_file(const std::filesystem::path& path);
  void load_string(const std::string& text);

  static const std::vector<std::string>& keys();

  int context_count() const;
  double effective_lambda() const;
  Schedule effective_schedule() const;
  TrainConfig effective_train() const;
  void validate() const;

  /// Canonical text form; load_string(to_ini()) reproduces the config.
  std::string to_ini() const;
  /// Hash of the canonical form without thread count and output directory.
  std::string fingerprint() const;
};

std::string format_schedule(const std::vector<Resolution>& stages);
std::vector<Resolution> parse_schedule(std::string_view text);

}  // namespace courtgrid
