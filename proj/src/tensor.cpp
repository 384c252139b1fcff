#include "courtgrid/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "courtgrid/common.hpp"

namespace courtgrid {

DenseTensor::DenseTensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  std::size_t n = 1;
  for (auto s : shape_) {
    require(s > 0, "tensor mode sizes must be positive");
    n *= s;
  }
  values_.assign(n, fill);
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  require(index.size() == shape_.size(), "tensor index has wrong arity");
  std::size_t off = 0;
  for (std::size_t m = 0; m < shape_.size(); ++m) {
    if (index[m] >= shape_[m]) {
      fail(ErrorKind::invalid_argument, "tensor index " + std::to_string(index[m]) +
                                            " out of range on mode " + std::to_string(m));
    }
    off = off * shape_[m] + index[m];
  }
  return off;
}

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
  return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::at(std::initializer_list<std::size_t> index) const {
  return values_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double DenseTensor::frobenius_norm() const {
  std::vector<double> sq(values_.size());
  std::transform(values_.begin(), values_.end(), sq.begin(), [](double v) { return v * v; });
  return std::sqrt(pairwise_sum(sq));
}

std::vector<std::size_t> CPFactors::shape() const {
  std::vector<std::size_t> s;
  for (const auto& f : factors) s.push_back(static_cast<std::size_t>(f.rows()));
  return s;
}

namespace {

void check_factors(const CPFactors& cp) {
  require(cp.rank >= 1, "CP rank must be >= 1");
  require(!cp.factors.empty(), "CP factors are empty");
  for (const auto& f : cp.factors) {
    require(f.cols() == cp.rank, "CP factor column count differs from rank");
    require(f.rows() >= 1, "CP factor has no rows");
  }
}

// Visits the tensor as (outer multi-index over modes 0..N-2) x (last mode),
// handing the visitor the elementwise product over `skip`-excluded leading
// modes for each outer index.
template <class Visit>
void for_each_fiber(const std::vector<Eigen::MatrixXd>& factors, int skip, Visit&& visit) {
  const std::size_t modes = factors.size();
  const int rank = static_cast<int>(factors[0].cols());
  const std::size_t last = modes - 1;
  std::vector<std::size_t> idx(last, 0);
  std::size_t outer = 1;
  for (std::size_t m = 0; m < last; ++m) outer *= static_cast<std::size_t>(factors[m].rows());
  Eigen::RowVectorXd prefix(rank);
  for (std::size_t o = 0; o < outer; ++o) {
    prefix.setOnes();
    for (std::size_t m = 0; m < last; ++m) {
      if (static_cast<int>(m) == skip) continue;
      prefix.array() *= factors[m].row(static_cast<Eigen::Index>(idx[m])).array();
    }
    visit(o, idx, prefix);
    for (std::size_t m = last; m-- > 0;) {
      if (++idx[m] < static_cast<std::size_t>(factors[m].rows())) break;
      idx[m] = 0;
    }
  }
}

Eigen::MatrixXd mttkrp(const DenseTensor& x, const std::vector<Eigen::MatrixXd>& factors,
                       std::size_t mode) {
  const std::size_t last = factors.size() - 1;
  const auto& tail = factors[last];
  const auto n_last = tail.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(factors[mode].rows(), factors[mode].cols());
  const auto vals = x.values();
  if (mode == last) {
    for_each_fiber(factors, -1, [&](std::size_t o, const auto&, const Eigen::RowVectorXd& prefix) {
      const double* fiber = vals.data() + o * static_cast<std::size_t>(n_last);
      for (Eigen::Index j = 0; j < n_last; ++j) out.row(j) += fiber[j] * prefix;
    });
  } else {
    Eigen::RowVectorXd acc(tail.cols());
    for_each_fiber(factors, static_cast<int>(mode),
                   [&](std::size_t o, const std::vector<std::size_t>& idx,
                       const Eigen::RowVectorXd& prefix) {
                     const double* fiber = vals.data() + o * static_cast<std::size_t>(n_last);
                     acc.setZero();
                     for (Eigen::Index j = 0; j < n_last; ++j) acc += fiber[j] * tail.row(j);
                     out.row(static_cast<Eigen::Index>(idx[mode])) += acc.cwiseProduct(prefix);
                   });
  }
  return out;
}

double squared_residual(const DenseTensor& x, const std::vector<Eigen::MatrixXd>& factors) {
  const auto& tail = factors.back();
  const auto n_last = tail.rows();
  const auto vals = x.values();
  std::vector<double> sq(x.size());
  for_each_fiber(factors, -1, [&](std::size_t o, const auto&, const Eigen::RowVectorXd& prefix) {
    const std::size_t base = o * static_cast<std::size_t>(n_last);
    for (Eigen::Index j = 0; j < n_last; ++j) {
      const double r = vals[base + static_cast<std::size_t>(j)] - tail.row(j).dot(prefix);
      sq[base + static_cast<std::size_t>(j)] = r * r;
    }
  });
  return pairwise_sum(sq);
}

Eigen::MatrixXd solve_normal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs) {
  // rhs is (mode_size x K); solve X * gram = rhs with gram symmetric.
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
    return llt.solve(rhs.transpose()).transpose();
  }
  Eigen::MatrixXd ridged = gram;
  ridged.diagonal().array() += 1e-8;
  return ridged.ldlt().solve(rhs.transpose()).transpose();
}

}  // namespace

CpAlsResult cp_als(const DenseTensor& tensor, const CpAlsOptions& options) {
  require(options.rank >= 1, "cp_als: rank must be >= 1");
  require(tensor.modes() >= 2, "cp_als: tensor needs at least two modes");
  require(options.max_iters >= 0, "cp_als: max_iters must be >= 0");
  for (double v : tensor.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::numeric, "cp_als: tensor has non-finite entries");
  }

  const int k = options.rank;
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  CpAlsResult result;
  auto& factors = result.factors.factors;
  result.factors.rank = k;
  for (auto size : tensor.shape()) {
    Eigen::MatrixXd f(static_cast<Eigen::Index>(size), k);
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = uni(rng);
    factors.push_back(std::move(f));
  }

  const double norm = tensor.frobenius_norm();
  const double scale = norm > 0 ? norm : 1.0;
  double prev = std::sqrt(squared_residual(tensor, factors)) / scale;
  for (int it = 0; it < options.max_iters; ++it) {
    for (std::size_t n = 0; n < factors.size(); ++n) {
      Eigen::MatrixXd gram = Eigen::MatrixXd::Ones(k, k);
      for (std::size_t m = 0; m < factors.size(); ++m) {
        if (m != n) gram.array() *= (factors[m].transpose() * factors[m]).array();
      }
      factors[n] = solve_normal(gram, mttkrp(tensor, factors, n));
      if (!factors[n].allFinite()) {
        fail(ErrorKind::numeric, "cp_als: non-finite factor at sweep " + std::to_string(it + 1));
      }
    }
    const double err = std::sqrt(squared_residual(tensor, factors)) / scale;
    if (!std::isfinite(err)) {
      fail(ErrorKind::numeric, "cp_als: non-finite error at sweep " + std::to_string(it + 1));
    }
    result.error_history.push_back(err);
    if (err == 0.0 || prev - err < options.tol * prev) break;
    prev = err;
  }
  return result;
}

DenseTensor cp_reconstruct(const CPFactors& cp) {
  check_factors(cp);
  DenseTensor out(cp.shape());
  const auto& tail = cp.factors.back();
  const auto n_last = tail.rows();
  auto vals = out.values();
  for_each_fiber(cp.factors, -1, [&](std::size_t o, const auto&, const Eigen::RowVectorXd& prefix) {
    const std::size_t base = o * static_cast<std::size_t>(n_last);
    for (Eigen::Index j = 0; j < n_last; ++j) {
      vals[base + static_cast<std::size_t>(j)] = tail.row(j).dot(prefix);
    }
  });
  return out;
}

double relative_error(const DenseTensor& tensor, const CPFactors& cp) {
  check_factors(cp);
  require(tensor.shape() == cp.shape(), "relative_error: shape mismatch");
  const double norm = tensor.frobenius_norm();
  const double res = std::sqrt(squared_residual(tensor, cp.factors));
  return norm > 0 ? res / norm : res;
}

void balance_columns(CPFactors& cp) {
  check_factors(cp);
  const double modes = static_cast<double>(cp.factors.size());
  for (int c = 0; c < cp.rank; ++c) {
    double log_total = 0.0;
    bool zero = false;
    for (const auto& f : cp.factors) {
      const double n = f.col(c).norm();
      if (n == 0.0) zero = true;
      log_total += zero ? 0.0 : std::log(n);
    }
    if (zero) continue;
    const double target = std::exp(log_total / modes);
    for (auto& f : cp.factors) f.col(c) *= target / f.col(c).norm();
  }
}

FactorAlignment align_factors(const CPFactors& estimate, const CPFactors& truth) {
  check_factors(estimate);
  check_factors(truth);
  require(estimate.rank == truth.rank, "align_factors: ranks differ");
  require(estimate.shape() == truth.shape(), "align_factors: shapes differ");
  const int k = truth.rank;

  Eigen::MatrixXd sim = Eigen::MatrixXd::Ones(k, k);  // (truth, estimate)
  for (std::size_t m = 0; m < truth.factors.size(); ++m) {
    const auto& t = truth.factors[m];
    const auto& e = estimate.factors[m];
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) {
        const double denom = t.col(a).norm() * e.col(b).norm();
        sim(a, b) *= denom > 0 ? t.col(a).dot(e.col(b)) / denom : 0.0;
      }
    }
  }

  FactorAlignment out;
  out.permutation.assign(static_cast<std::size_t>(k), -1);
  out.signs.assign(static_cast<std::size_t>(k), 1);
  std::vector<bool> used_t(static_cast<std::size_t>(k), false), used_e(static_cast<std::size_t>(k), false);
  double total = 0.0;
  for (int step = 0; step < k; ++step) {
    int best_t = -1, best_e = -1;
    double best = -1.0;
    for (int a = 0; a < k; ++a) {
      if (used_t[static_cast<std::size_t>(a)]) continue;
      for (int b = 0; b < k; ++b) {
        if (used_e[static_cast<std::size_t>(b)]) continue;
        if (std::abs(sim(a, b)) > best) {
          best = std::abs(sim(a, b));
          best_t = a;
          best_e = b;
        }
      }
    }
    used_t[static_cast<std::size_t>(best_t)] = true;
    used_e[static_cast<std::size_t>(best_e)] = true;
    out.permutation[static_cast<std::size_t>(best_t)] = best_e;
    out.signs[static_cast<std::size_t>(best_t)] = sim(best_t, best_e) < 0 ? -1 : 1;
    total += best;
  }
  out.mean_cosine = total / k;
  return out;
}

}  // namespace courtgrid
