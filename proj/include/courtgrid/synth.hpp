#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "courtgrid/ingest.hpp"
#include "courtgrid/model.hpp"
#include "courtgrid/trainer.hpp"

namespace courtgrid {

/// Ground truth for synthetic data. With contexts == 1 the planted logit is
/// bias + sum_k A[i,k] C[d1,k] sum_{d2} D[d2,k]; with contexts == F > 1 the court
/// factor has one block per quarter (dynamic layout) and the quarter selects it.
struct PlantedSpec {
  int players = 20;
  int rank = 3;
  int contexts = 1;
  GridShape court{8, 10};
  GridShape defender{6, 6};
  Eigen::MatrixXd A, C, D;
  double bias = -1.5;
  int min_defenders = 1;
  int max_defenders = 3;
  double noise = 0.0;  // std-dev of per-sample logit noise
  EncodingGeometry geometry;
  Vec2 basket{25.0, 5.25};

  Resolution resolution() const { return {court, defender, contexts}; }
  Variant variant() const { return contexts > 1 ? Variant::dynamic : Variant::base; }
  void validate() const;
};

struct PlantedOptions {
  int players = 20;
  int rank = 3;
  int contexts = 1;
  /// Correlation between the per-context court blocks.
  double rho = 0.3;
  GridShape court{8, 10};
  GridShape defender{6, 6};
  double factor_scale = 1.0;
  double bias = -1.5;
  std::uint64_t seed = 0;
};

/// Gaussian planted factors; court blocks are sqrt(rho)*shared + sqrt(1-rho)*own.
PlantedSpec make_planted(const PlantedOptions& options);

/// Players, quarters and court positions uniform; defenders uniform over the
/// defender grid footprint around the ball-handler; labels ~ Bernoulli(p).
std::vector<LabeledSample> generate(const PlantedSpec& spec, std::size_t n_samples,
                                    std::uint64_t seed);

/// The noise-free planted probability of a sample.
double bayes_oracle(const PlantedSpec& spec, const LabeledSample& sample);

/// The planted factors as a low-rank model (variant base or dynamic).
LowRankModel planted_model(const PlantedSpec& spec);

std::string planted_to_json(const PlantedSpec& spec);
PlantedSpec planted_from_json(const std::string& text);
void write_planted(const std::filesystem::path& path, const PlantedSpec& spec);
PlantedSpec read_planted(const std::filesystem::path& path);

}  // namespace courtgrid
