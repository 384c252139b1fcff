#include "courtgrid/model.hpp"

#include <algorithm>
#include <cmath>

#include "courtgrid/parallel.hpp"

namespace courtgrid {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::base: return "base";
    case Variant::st: return "st";
    case Variant::dynamic: return "dynamic";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  if (text == "base") return Variant::base;
  if (text == "st") return Variant::st;
  if (text == "dynamic") return Variant::dynamic;
  fail(ErrorKind::parse, "unknown model variant '" + std::string(text) + "'");
}

std::string Resolution::str() const {
  return court.str() + "/" + defender.str() + "/" + std::to_string(contexts);
}

namespace {

int court_axis_of(Variant v, const Resolution& res) {
  return res.court.cells() * (v == Variant::dynamic ? res.contexts : 1);
}

void check_resolution(Variant v, const Resolution& res) {
  require(res.court.cells() > 0 && res.defender.cells() > 0, "resolution grids must be non-empty");
  require(res.contexts >= 1, "context count must be >= 1");
  require(v != Variant::base || res.contexts == 1, "base variant has a single context");
}

constexpr double kClampLo = 1e-12;

}  // namespace

int FullRankModel::court_axis() const { return court_axis_of(variant, res); }
int LowRankModel::court_axis() const { return court_axis_of(variant, res); }

FullRankModel FullRankModel::zeros(Variant variant, Resolution res, int players) {
  check_resolution(variant, res);
  require(players >= 1, "model needs at least one player");
  FullRankModel m;
  m.variant = variant;
  m.res = res;
  m.players = players;
  const auto i = static_cast<std::size_t>(players);
  const auto d1 = static_cast<std::size_t>(court_axis_of(variant, res));
  const auto d2 = static_cast<std::size_t>(res.defender.cells());
  m.weights = variant == Variant::st
                  ? DenseTensor({i, static_cast<std::size_t>(res.contexts), d1, d2})
                  : DenseTensor({i, d1, d2});
  return m;
}

LowRankModel LowRankModel::zeros(Variant variant, Resolution res, int players, int rank) {
  check_resolution(variant, res);
  require(players >= 1, "model needs at least one player");
  require(rank >= 1, "rank must be >= 1");
  LowRankModel m;
  m.variant = variant;
  m.res = res;
  m.players = players;
  m.rank = rank;
  m.A = Eigen::MatrixXd::Zero(players, rank);
  if (variant == Variant::st) m.B = Eigen::MatrixXd::Zero(res.contexts, rank);
  m.C = Eigen::MatrixXd::Zero(court_axis_of(variant, res), rank);
  m.D = Eigen::MatrixXd::Zero(res.defender.cells(), rank);
  return m;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

BceTerm bce(double z, int label) {
  // -ln p for y = 1 is softplus(-z); -ln(1-p) for y = 0 is softplus(z).
  const double s = label == 1 ? -z : z;
  const double loss = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  const double hi = -std::log(kClampLo);
  const double lo = -std::log1p(-kClampLo);
  if (loss >= hi) return {hi, 0.0};
  if (loss <= lo) return {lo, 0.0};
  return {loss, sigmoid(z) - label};
}

namespace {

template <class Model>
void validate_common(const Model& model, const SampleEncoding& enc) {
  if (enc.player < 0 || enc.player >= model.players) {
    fail(ErrorKind::invalid_argument, "player " + std::to_string(enc.player) + " out of range");
  }
  if (model.variant == Variant::st && (enc.context < 0 || enc.context >= model.res.contexts)) {
    fail(ErrorKind::invalid_argument, "context " + std::to_string(enc.context) + " out of range");
  }
  if (enc.court < 0 || enc.court >= model.court_axis()) {
    fail(ErrorKind::invalid_argument, "court cell " + std::to_string(enc.court) + " out of range");
  }
  for (int d : enc.defenders) {
    if (d < 0 || d >= model.res.defender.cells()) {
      fail(ErrorKind::invalid_argument, "defender cell " + std::to_string(d) + " out of range");
    }
  }
  if (enc.label != 0 && enc.label != 1) fail(ErrorKind::invalid_argument, "label must be 0 or 1");
}

// Offset of W[i, (t,) d1, 0].
std::size_t row_offset(const FullRankModel& m, const SampleEncoding& e) {
  const auto d1 = static_cast<std::size_t>(m.court_axis());
  const auto d2 = static_cast<std::size_t>(m.res.defender.cells());
  std::size_t off = static_cast<std::size_t>(e.player);
  if (m.variant == Variant::st) {
    off = off * static_cast<std::size_t>(m.res.contexts) + static_cast<std::size_t>(e.context);
  }
  return (off * d1 + static_cast<std::size_t>(e.court)) * d2;
}

double logit_unchecked(const FullRankModel& m, const SampleEncoding& e) {
  const double* row = m.weights.values().data() + row_offset(m, e);
  double z = m.bias;
  for (int d : e.defenders) z += row[d];
  return z;
}

// Per-component coefficient A[i,k] * B[t,k] * C[d1,k] (without D).
Eigen::RowVectorXd spatial_weight(const LowRankModel& m, const SampleEncoding& e) {
  Eigen::RowVectorXd w = m.A.row(e.player).cwiseProduct(m.C.row(e.court));
  if (m.variant == Variant::st) w = w.cwiseProduct(m.B.row(e.context));
  return w;
}

Eigen::RowVectorXd defender_sum(const LowRankModel& m, const SampleEncoding& e) {
  Eigen::RowVectorXd s = Eigen::RowVectorXd::Zero(m.rank);
  for (int d : e.defenders) s += m.D.row(d);
  return s;
}

double logit_unchecked(const LowRankModel& m, const SampleEncoding& e) {
  return m.bias + spatial_weight(m, e).dot(defender_sum(m, e));
}

template <class Model>
std::vector<BceTerm> per_sample_terms(const Model& m, std::span<const SampleEncoding> batch) {
  for (const auto& e : batch) validate(m, e);
  std::vector<BceTerm> terms(batch.size());
  parallel_for(batch.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) terms[s] = bce(logit_unchecked(m, batch[s]), batch[s].label);
  });
  return terms;
}

double mean_of(const std::vector<BceTerm>& terms) {
  std::vector<double> losses(terms.size());
  std::transform(terms.begin(), terms.end(), losses.begin(), [](const BceTerm& t) { return t.loss; });
  return pairwise_sum(losses) / static_cast<double>(terms.size());
}

Eigen::MatrixXd mixing_matrix(int contexts, double step_times_lambda) {
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(contexts, contexts);
  for (int f = 1; f < contexts; ++f) {
    lap(f, f) += 1;
    lap(f - 1, f - 1) += 1;
    lap(f, f - 1) -= 1;
    lap(f - 1, f) -= 1;
  }
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(contexts, contexts) + 2.0 * step_times_lambda * lap;
  return sys.inverse();
}

// data laid out as [outer][contexts][inner].
void mix_blocks(double* data, std::size_t outer, int contexts, std::size_t inner,
                const Eigen::MatrixXd& mix) {
  const auto f_count = static_cast<std::size_t>(contexts);
  std::vector<double> fiber(f_count);
  for (std::size_t o = 0; o < outer; ++o) {
    double* base = data + o * f_count * inner;
    for (std::size_t j = 0; j < inner; ++j) {
      for (std::size_t f = 0; f < f_count; ++f) fiber[f] = base[f * inner + j];
      for (std::size_t f = 0; f < f_count; ++f) {
        double v = 0.0;
        for (std::size_t g = 0; g < f_count; ++g) {
          v += mix(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(g)) * fiber[g];
        }
        base[f * inner + j] = v;
      }
    }
  }
}

// Penalty and gradient over [outer][contexts][inner] data.
double block_penalty(const double* data, double* grad, std::size_t outer, int contexts,
                     std::size_t inner, double lambda) {
  const auto f_count = static_cast<std::size_t>(contexts);
  std::vector<double> sq;
  sq.reserve(outer * inner * (f_count > 0 ? f_count - 1 : 0));
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * f_count * inner;
    for (std::size_t f = 1; f < f_count; ++f) {
      for (std::size_t j = 0; j < inner; ++j) {
        const double diff = data[base + f * inner + j] - data[base + (f - 1) * inner + j];
        sq.push_back(diff * diff);
        grad[base + f * inner + j] += 2.0 * lambda * diff;
        grad[base + (f - 1) * inner + j] -= 2.0 * lambda * diff;
      }
    }
  }
  return lambda * pairwise_sum(sq);
}

}  // namespace

void validate(const FullRankModel& model, const SampleEncoding& enc) { validate_common(model, enc); }
void validate(const LowRankModel& model, const SampleEncoding& enc) { validate_common(model, enc); }

double logit(const FullRankModel& model, const SampleEncoding& enc) {
  validate(model, enc);
  return logit_unchecked(model, enc);
}

double logit(const LowRankModel& model, const SampleEncoding& enc) {
  validate(model, enc);
  return logit_unchecked(model, enc);
}

double forward_full(const FullRankModel& model, const SampleEncoding& enc) {
  return sigmoid(logit(model, enc));
}

double forward_lowrank(const LowRankModel& model, const SampleEncoding& enc) {
  return sigmoid(logit(model, enc));
}

double mean_loss(const FullRankModel& model, std::span<const SampleEncoding> samples) {
  require(!samples.empty(), "mean_loss: empty sample set");
  return mean_of(per_sample_terms(model, samples));
}

double mean_loss(const LowRankModel& model, std::span<const SampleEncoding> samples) {
  require(!samples.empty(), "mean_loss: empty sample set");
  return mean_of(per_sample_terms(model, samples));
}

std::pair<LossReport, FullRankModel> loss_and_grad(const FullRankModel& model,
                                                   std::span<const SampleEncoding> batch,
                                                   double lambda) {
  require(!batch.empty(), "loss_and_grad: empty batch");
  const auto terms = per_sample_terms(model, batch);
  FullRankModel grad = FullRankModel::zeros(model.variant, model.res, model.players);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  auto g = grad.weights.values();
  std::vector<double> dbias(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const double d = terms[s].dlogit * inv_n;
    dbias[s] = d;
    const std::size_t off = row_offset(model, batch[s]);
    for (int c : batch[s].defenders) g[off + static_cast<std::size_t>(c)] += d;
  }
  grad.bias = pairwise_sum(dbias);

  LossReport report;
  report.data_loss = mean_of(terms);
  if (model.variant == Variant::dynamic && lambda != 0.0) {
    const auto& shape = model.weights.shape();
    report.reg_loss = block_penalty(model.weights.values().data(), g.data(), shape[0],
                                    model.res.contexts, shape[1] / static_cast<std::size_t>(model.res.contexts) * shape[2],
                                    lambda);
  }
  report.total = report.data_loss + report.reg_loss;
  return {report, std::move(grad)};
}

std::pair<LossReport, LowRankModel> loss_and_grad(const LowRankModel& model,
                                                  std::span<const SampleEncoding> batch,
                                                  double lambda) {
  require(!batch.empty(), "loss_and_grad: empty batch");
  const auto terms = per_sample_terms(model, batch);
  LowRankModel grad = LowRankModel::zeros(model.variant, model.res, model.players, model.rank);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const bool st = model.variant == Variant::st;
  std::vector<double> dbias(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& e = batch[s];
    const double d = terms[s].dlogit * inv_n;
    dbias[s] = d;
    if (d == 0.0) continue;
    const Eigen::RowVectorXd dsum = defender_sum(model, e);
    const Eigen::RowVectorXd a = model.A.row(e.player);
    const Eigen::RowVectorXd c = model.C.row(e.court);
    const Eigen::RowVectorXd b = st ? Eigen::RowVectorXd(model.B.row(e.context))
                                    : Eigen::RowVectorXd::Ones(model.rank);
    grad.A.row(e.player) += d * b.cwiseProduct(c).cwiseProduct(dsum);
    grad.C.row(e.court) += d * a.cwiseProduct(b).cwiseProduct(dsum);
    if (st) grad.B.row(e.context) += d * a.cwiseProduct(c).cwiseProduct(dsum);
    const Eigen::RowVectorXd abc = d * a.cwiseProduct(b).cwiseProduct(c);
    for (int cell : e.defenders) grad.D.row(cell) += abc;
  }
  grad.bias = pairwise_sum(dbias);

  LossReport report;
  report.data_loss = mean_of(terms);
  if (model.variant == Variant::dynamic && lambda != 0.0) {
    auto [value, g] = temporal_penalty(model.C, model.res.contexts, lambda);
    report.reg_loss = value;
    grad.C += g;
  }
  report.total = report.data_loss + report.reg_loss;
  return {report, std::move(grad)};
}

std::pair<double, DenseTensor> temporal_penalty(const DenseTensor& weights, int contexts,
                                                double lambda) {
  require(weights.modes() == 3, "temporal_penalty: expected a (player, court, defender) tensor");
  require(contexts >= 1, "temporal_penalty: contexts must be >= 1");
  const auto& shape = weights.shape();
  if (shape[1] % static_cast<std::size_t>(contexts) != 0) {
    fail(ErrorKind::invalid_argument, "temporal_penalty: court axis " + std::to_string(shape[1]) +
                                          " not divisible by " + std::to_string(contexts));
  }
  DenseTensor grad(shape);
  const std::size_t inner = shape[1] / static_cast<std::size_t>(contexts) * shape[2];
  const double value =
      block_penalty(weights.values().data(), grad.values().data(), shape[0], contexts, inner, lambda);
  return {value, std::move(grad)};
}

std::pair<double, Eigen::MatrixXd> temporal_penalty(const Eigen::MatrixXd& court_factor,
                                                    int contexts, double lambda) {
  require(contexts >= 1, "temporal_penalty: contexts must be >= 1");
  if (court_factor.rows() % contexts != 0) {
    fail(ErrorKind::invalid_argument, "temporal_penalty: court rows not divisible by contexts");
  }
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(court_factor.rows(), court_factor.cols());
  // Column-major storage: [column][context][cell].
  const double value = block_penalty(court_factor.data(), grad.data(),
                                     static_cast<std::size_t>(court_factor.cols()), contexts,
                                     static_cast<std::size_t>(court_factor.rows() / contexts), lambda);
  return {value, std::move(grad)};
}

void temporal_prox(DenseTensor& weights, int contexts, double step_times_lambda) {
  if (contexts <= 1 || step_times_lambda == 0.0) return;
  const auto shape = weights.shape();
  require(weights.modes() == 3 && shape[1] % static_cast<std::size_t>(contexts) == 0,
          "temporal_prox: bad tensor shape");
  mix_blocks(weights.values().data(), shape[0], contexts,
             shape[1] / static_cast<std::size_t>(contexts) * shape[2],
             mixing_matrix(contexts, step_times_lambda));
}

void temporal_prox(Eigen::MatrixXd& court_factor, int contexts, double step_times_lambda) {
  if (contexts <= 1 || step_times_lambda == 0.0) return;
  require(court_factor.rows() % contexts == 0, "temporal_prox: bad factor shape");
  mix_blocks(court_factor.data(), static_cast<std::size_t>(court_factor.cols()), contexts,
             static_cast<std::size_t>(court_factor.rows() / contexts),
             mixing_matrix(contexts, step_times_lambda));
}

namespace {

void adagrad_update(double& param, double g, double& sum_sq, double lr, double eps) {
  sum_sq += g * g;
  param -= lr * g / (std::sqrt(sum_sq) + eps);
}

}  // namespace

double sgd_step(FullRankModel& model, std::span<const SampleEncoding> batch, double lr,
                double lambda, AdagradState* adagrad) {
  require(!batch.empty(), "sgd_step: empty batch");
  const auto terms = per_sample_terms(model, batch);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  auto w = model.weights.values();
  std::vector<double> dbias(batch.size());
  // Sparse gradient: (flat index, contribution) in batch order, merged by index.
  std::vector<std::pair<std::size_t, double>> touched;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const double d = terms[s].dlogit * inv_n;
    dbias[s] = d;
    if (d == 0.0) continue;
    const std::size_t off = row_offset(model, batch[s]);
    for (int c : batch[s].defenders) touched.emplace_back(off + static_cast<std::size_t>(c), d);
  }
  const double gbias = pairwise_sum(dbias);
  if (adagrad == nullptr) {
    for (const auto& [i, d] : touched) w[i] -= lr * d;
    model.bias -= lr * gbias;
  } else {
    auto& acc = adagrad->sum_sq;
    if (acc.size() != w.size() + 1) acc.assign(w.size() + 1, 0.0);
    std::stable_sort(touched.begin(), touched.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t j = 0; j < touched.size();) {
      const std::size_t i = touched[j].first;
      double g = 0.0;
      for (; j < touched.size() && touched[j].first == i; ++j) g += touched[j].second;
      adagrad_update(w[i], g, acc[i], lr, adagrad->epsilon);
    }
    adagrad_update(model.bias, gbias, acc.back(), lr, adagrad->epsilon);
  }
  if (model.variant == Variant::dynamic) temporal_prox(model.weights, model.res.contexts, lr * lambda);
  return mean_of(terms);
}

double sgd_step(LowRankModel& model, std::span<const SampleEncoding> batch, double lr,
                double lambda, AdagradState* adagrad) {
  auto [report, grad] = loss_and_grad(model, batch, 0.0);
  if (adagrad == nullptr) {
    model.A -= lr * grad.A;
    if (model.variant == Variant::st) model.B -= lr * grad.B;
    model.C -= lr * grad.C;
    model.D -= lr * grad.D;
    model.bias -= lr * grad.bias;
  } else {
    const std::size_t total =
        static_cast<std::size_t>(model.A.size() + model.B.size() + model.C.size() + model.D.size()) + 1;
    auto& acc = adagrad->sum_sq;
    if (acc.size() != total) acc.assign(total, 0.0);
    std::size_t k = 0;
    for (auto [p, g] : {std::pair{&model.A, &grad.A}, std::pair{&model.B, &grad.B},
                        std::pair{&model.C, &grad.C}, std::pair{&model.D, &grad.D}}) {
      double* pv = p->data();
      const double* gv = g->data();
      for (Eigen::Index i = 0; i < p->size(); ++i, ++k) {
        if (gv[i] != 0.0) adagrad_update(pv[i], gv[i], acc[k], lr, adagrad->epsilon);
      }
    }
    adagrad_update(model.bias, grad.bias, acc[k], lr, adagrad->epsilon);
  }
  if (model.variant == Variant::dynamic) temporal_prox(model.C, model.res.contexts, lr * lambda);
  return report.data_loss;
}

CPFactors as_cp(const LowRankModel& model) {
  CPFactors cp;
  cp.rank = model.rank;
  cp.factors.push_back(model.A);
  if (model.variant == Variant::st) cp.factors.push_back(model.B);
  cp.factors.push_back(model.C);
  cp.factors.push_back(model.D);
  return cp;
}

LowRankModel init_lowrank_from_full(const FullRankModel& full, int rank, std::uint64_t seed,
                                    int max_iters) {
  CpAlsOptions opts;
  opts.rank = rank;
  opts.seed = seed;
  opts.max_iters = max_iters;
  opts.tol = 1e-9;
  auto cp = cp_als(full.weights, opts).factors;
  balance_columns(cp);
  LowRankModel m = LowRankModel::zeros(full.variant, full.res, full.players, rank);
  std::size_t n = 0;
  m.A = cp.factors[n++];
  if (full.variant == Variant::st) m.B = cp.factors[n++];
  m.C = cp.factors[n++];
  m.D = cp.factors[n++];
  m.bias = full.bias;
  return m;
}

FullRankModel reconstruct_full(const LowRankModel& model) {
  FullRankModel full = FullRankModel::zeros(model.variant, model.res, model.players);
  full.weights = cp_reconstruct(as_cp(model));
  full.bias = model.bias;
  return full;
}

}  // namespace courtgrid
