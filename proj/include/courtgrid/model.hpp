#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "courtgrid/common.hpp"
#include "courtgrid/tensor.hpp"

namespace courtgrid {

/// base: W[i, d1, d2]. st: W[i, t, d1, d2]. dynamic: W[i, d1', d2] where the
/// court axis holds one copy of the court per context (d1' = d1 + f*|court|).
enum class Variant { base, st, dynamic };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

/// A training resolution: court grid, defender grid and context count.
struct Resolution {
  GridShape court{4, 5};
  GridShape defender{6, 6};
  int contexts = 1;

  std::string str() const;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// One-hot view of a sample: exactly one court cell (already extended for the
/// dynamic variant), a set of distinct defender cells.
struct SampleEncoding {
  int player = 0;
  int context = 0;
  int court = 0;
  std::vector<int> defenders;
  int label = 0;
};

struct FullRankModel {
  Variant variant = Variant::base;
  Resolution res;
  int players = 0;
  DenseTensor weights;
  double bias = 0.0;

  int court_axis() const;
  static FullRankModel zeros(Variant variant, Resolution res, int players);
};

/// Factors A (players), B (contexts; ST only, empty otherwise), C (court
/// axis), D (defender cells).
struct LowRankModel {
  Variant variant = Variant::base;
  Resolution res;
  int players = 0;
  int rank = 0;
  Eigen::MatrixXd A, B, C, D;
  double bias = 0.0;

  int court_axis() const;
  static LowRankModel zeros(Variant variant, Resolution res, int players, int rank);
};

struct LossReport {
  double data_loss = 0.0;
  double reg_loss = 0.0;
  double total = 0.0;
};

double sigmoid(double z);

void validate(const FullRankModel& model, const SampleEncoding& enc);
void validate(const LowRankModel& model, const SampleEncoding& enc);

double logit(const FullRankModel& model, const SampleEncoding& enc);
double logit(const LowRankModel& model, const SampleEncoding& enc);
double forward_full(const FullRankModel& model, const SampleEncoding& enc);
double forward_lowrank(const LowRankModel& model, const SampleEncoding& enc);

/// Binary cross-entropy of one sample with p clamped to [1e-12, 1 - 1e-12],
/// and its derivative with respect to the logit (0 where the clamp is active).
struct BceTerm {
  double loss = 0.0;
  double dlogit = 0.0;
};
BceTerm bce(double z, int label);

/// Mean BCE over the batch plus the temporal penalty (dynamic variant only).
/// The gradient is returned in a model of the same shape.
std::pair<LossReport, FullRankModel> loss_and_grad(const FullRankModel& model,
                                                   std::span<const SampleEncoding> batch,
                                                   double lambda);
std::pair<LossReport, LowRankModel> loss_and_grad(const LowRankModel& model,
                                                  std::span<const SampleEncoding> batch,
                                                  double lambda);

/// Mean BCE without gradients.
double mean_loss(const FullRankModel& model, std::span<const SampleEncoding> samples);
double mean_loss(const LowRankModel& model, std::span<const SampleEncoding> samples);

/// lambda * sum_f ||W_f - W_{f-1}||_F^2 over the `contexts` court blocks of a
/// (players, contexts*|court|, defender) tensor, and its gradient.
std::pair<double, DenseTensor> temporal_penalty(const DenseTensor& weights, int contexts,
                                                double lambda);
/// Same penalty on the block rows of a court factor matrix.
std::pair<double, Eigen::MatrixXd> temporal_penalty(const Eigen::MatrixXd& court_factor,
                                                    int contexts, double lambda);

/// Proximal step x <- argmin 1/2||x - y||^2 + step * penalty(x), applied in
/// place. Exact for any step size, unlike a plain gradient step.
void temporal_prox(DenseTensor& weights, int contexts, double step_times_lambda);
void temporal_prox(Eigen::MatrixXd& court_factor, int contexts, double step_times_lambda);

/// Per-parameter squared-gradient sums (weights then bias; or A, B, C, D then
/// bias). Sized on first use; reset it whenever the model changes shape.
struct AdagradState {
  std::vector<double> sum_sq;
  double epsilon = 1e-8;
};

/// One minibatch update on the mean BCE, followed by the exact temporal
/// proximal step (step lr) for the dynamic variant. Without `adagrad` this is
/// plain SGD; with it each parameter moves by lr * g / sqrt(sum of g^2).
/// Returns the batch's mean data loss before the update.
double sgd_step(FullRankModel& model, std::span<const SampleEncoding> batch, double lr,
                double lambda, AdagradState* adagrad = nullptr);
double sgd_step(LowRankModel& model, std::span<const SampleEncoding> batch, double lr,
                double lambda, AdagradState* adagrad = nullptr);

/// Handoff: CP-ALS of the full-rank weights, column-balanced; bias copied.
LowRankModel init_lowrank_from_full(const FullRankModel& full, int rank, std::uint64_t seed,
                                    int max_iters = 200);

FullRankModel reconstruct_full(const LowRankModel& model);

/// Factor view of a low-rank model in tensor mode order (A, [B,] C, D).
CPFactors as_cp(const LowRankModel& model);

}  // namespace courtgrid
