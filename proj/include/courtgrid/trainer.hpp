#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courtgrid/discretizer.hpp"
#include "courtgrid/ingest.hpp"
#include "courtgrid/model.hpp"

namespace courtgrid {

enum class PipelineVariant { base, st_quarter, st_playstyle, dynamic_quarter, dynamic_playstyle };

std::string_view to_string(PipelineVariant v);
PipelineVariant parse_pipeline_variant(std::string_view text);
Variant model_variant(PipelineVariant v);
bool uses_playstyle(PipelineVariant v);

/// Where a sample's context value comes from.
class ContextSource {
 public:
  static ContextSource none();
  static ContextSource quarters();
  /// cluster_of_player[i] is the cluster of dense player i, or -1 if unknown.
  static ContextSource playstyles(std::vector<int> cluster_of_player, int clusters);
  static ContextSource for_variant(PipelineVariant v, const std::vector<int>* cluster_of_player,
                                   int clusters);

  int count() const noexcept { return count_; }
  int context_of(const LabeledSample& s) const;
  /// Throws if any sample's player lacks a cluster; the message lists them.
  void check_covers(std::span<const LabeledSample> samples) const;

 private:
  enum class Kind { none, quarter, playstyle };
  Kind kind_ = Kind::none;
  int count_ = 1;
  std::vector<int> cluster_;
};

/// Geometry used to turn samples into one-hot encodings.
struct EncodingGeometry {
  CourtGeometry court;
  double defender_frontal_ft = 24.0;
  double defender_lateral_ft = 24.0;
};

/// Encodes samples at a resolution. With res.contexts == 1 every sample maps
/// to context 0 (the unsplit starting point of context finegraining).
std::vector<SampleEncoding> encode(std::span<const LabeledSample> samples, Variant variant,
                                   const Resolution& res, const ContextSource& contexts,
                                   const EncodingGeometry& geometry);

struct Schedule {
  std::vector<Resolution> full_rank;
  std::vector<Resolution> low_rank;

  /// (4x5,6x6), (8x10,6x6), (8x10,12x12) full-rank, then (8x10,12x12),
  /// (20x25,12x12), (40x50,12x12) low-rank. ST starts at one context and
  /// finegrains to `contexts` after the first stage; dynamic uses `contexts`
  /// throughout.
  static Schedule defaults(Variant variant, int contexts);
  void validate(Variant variant) const;
};

enum class Optimizer { sgd, adagrad };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view text);

struct TrainConfig {
  Optimizer optimizer_full = Optimizer::sgd;
  Optimizer optimizer_low = Optimizer::adagrad;
  int max_epochs = 50;
  double lr_full = 2.0;
  double lr_low = 0.5;
  double lr_decay = 0.5;
  int patience = 1;
  int batch_size = 64;
  int rank = 3;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  /// Fraction of negatives kept per epoch (1 = no subsampling).
  double negative_keep = 1.0;
  int cp_iters = 200;
  double init_scale = 0.01;
  /// Fixed decision threshold; tuned on validation when empty.
  std::optional<double> threshold;
  EncodingGeometry geometry;

  void validate() const;
};

struct Metrics {
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double val_loss = 0.0;
  double threshold = 0.5;
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct EpochLog {
  std::string stage;  // "full" or "low"
  Resolution res;
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct StageTiming {
  std::string stage;
  Resolution res;
  int epochs = 0;
  double seconds = 0.0;
};

struct TrainReport {
  std::string variant;
  std::vector<EpochLog> epochs;
  std::vector<StageTiming> timings;
  double handoff_error = 0.0;  // relative CP reconstruction error at handoff
  Metrics validation;
  Metrics test;

  /// One JSON document. Wall-clock timings are excluded unless requested so
  /// the report is byte-reproducible.
  std::string to_json(bool include_timings = false) const;
  /// stage,resolution,epoch,train_loss,val_loss,lr
  std::string metrics_csv() const;
};

/// Everything the stage loops need besides the model itself.
struct TrainingData {
  const DatasetSplit* split = nullptr;
  ContextSource contexts = ContextSource::none();
  int players = 0;
};

FullRankModel train_full_rank(const TrainingData& data, const Schedule& schedule,
                              const TrainConfig& config, Variant variant,
                              TrainReport* report = nullptr);

LowRankModel train_low_rank(LowRankModel init, const TrainingData& data,
                            const Schedule& schedule, const TrainConfig& config,
                            TrainReport* report = nullptr);

/// Copy finegraining: each fine cell (and each new context) takes its parent's value.
FullRankModel finegrain(const FullRankModel& model, const Resolution& next);
LowRankModel finegrain(const LowRankModel& model, const Resolution& next);

Metrics evaluate_scores(std::span<const double> probabilities, std::span<const int> labels,
                        double threshold);
Metrics evaluate(const LowRankModel& model, std::span<const SampleEncoding> samples,
                 double threshold);
Metrics evaluate(const FullRankModel& model, std::span<const SampleEncoding> samples,
                 double threshold);

/// Best validation F1 over {0.05, 0.10, ..., 0.95}; ties go to the lowest.
double tune_threshold_scores(std::span<const double> probabilities, std::span<const int> labels);
double tune_threshold(const LowRankModel& model, std::span<const SampleEncoding> validation);

std::vector<double> predict(const LowRankModel& model, std::span<const SampleEncoding> samples);
std::vector<double> predict(const FullRankModel& model, std::span<const SampleEncoding> samples);

struct PipelineResult {
  LowRankModel model;
  TrainReport report;
  double threshold = 0.5;
};

/// Full-rank stage, CP handoff, low-rank stage, threshold tuning and test
/// metrics. For playstyle variants `cluster_of_player` (dense player ->
/// cluster) is required.
PipelineResult run_pipeline(const DatasetSplit& data, int players, const TrainConfig& config,
                            PipelineVariant variant, const Schedule& schedule,
                            const std::vector<int>* cluster_of_player = nullptr,
                            int clusters = 7);

}  // namespace courtgrid
