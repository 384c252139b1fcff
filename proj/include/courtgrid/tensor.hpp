#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace courtgrid {

/// Row-major dense tensor of doubles.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape, double fill = 0.0);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t modes() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  std::size_t offset(std::span<const std::size_t> index) const;
  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  double frobenius_norm() const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

/// CP (canonical polyadic) factors: one mode_size x rank matrix per mode.
struct CPFactors {
  int rank = 0;
  std::vector<Eigen::MatrixXd> factors;

  std::vector<std::size_t> shape() const;
};

struct CpAlsOptions {
  int rank = 1;
  int max_iters = 500;
  double tol = 1e-12;
  std::uint64_t seed = 0;
};

struct CpAlsResult {
  CPFactors factors;
  /// Relative Frobenius reconstruction error after each sweep.
  std::vector<double> error_history;
};

/// Alternating least squares from a seeded uniform(-0.5, 0.5) start. Stops
/// when the relative error improves by less than `tol` (relative) in a sweep.
CpAlsResult cp_als(const DenseTensor& tensor, const CpAlsOptions& options);

DenseTensor cp_reconstruct(const CPFactors& factors);

/// ||tensor - reconstruct(factors)||_F / ||tensor||_F (absolute error if the
/// tensor is zero).
double relative_error(const DenseTensor& tensor, const CPFactors& factors);

/// Rescales the columns so every mode carries the same column norm. The
/// reconstruction is unchanged.
void balance_columns(CPFactors& factors);

struct FactorAlignment {
  std::vector<int> permutation;  // truth column k <-> estimated column permutation[k]
  std::vector<int> signs;        // sign of the matched component similarity
  double mean_cosine = 0.0;      // mean |cosine| over matched components
};

/// Greedy matching of rank-1 components by absolute cosine, where the
/// similarity of two components is the product of their per-mode column
/// cosines (the cosine of the vectorized outer products).
FactorAlignment align_factors(const CPFactors& estimate, const CPFactors& truth);

}  // namespace courtgrid
