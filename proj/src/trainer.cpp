#include "courtgrid/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <type_traits>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"

namespace courtgrid {

std::string_view to_string(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::base: return "base";
    case PipelineVariant::st_quarter: return "st_quarter";
    case PipelineVariant::st_playstyle: return "st_playstyle";
    case PipelineVariant::dynamic_quarter: return "dynamic_quarter";
    case PipelineVariant::dynamic_playstyle: return "dynamic_playstyle";
  }
  return "?";
}

PipelineVariant parse_pipeline_variant(std::string_view text) {
  for (auto v : {PipelineVariant::base, PipelineVariant::st_quarter, PipelineVariant::st_playstyle,
                 PipelineVariant::dynamic_quarter, PipelineVariant::dynamic_playstyle}) {
    if (text == to_string(v)) return v;
  }
  fail(ErrorKind::parse, "unknown variant '" + std::string(text) + "'");
}

Variant model_variant(PipelineVariant v) {
  switch (v) {
    case PipelineVariant::base: return Variant::base;
    case PipelineVariant::st_quarter:
    case PipelineVariant::st_playstyle: return Variant::st;
    case PipelineVariant::dynamic_quarter:
    case PipelineVariant::dynamic_playstyle: return Variant::dynamic;
  }
  return Variant::base;
}

std::string_view to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adagrad"; }

Optimizer parse_optimizer(std::string_view text) {
  if (text == "sgd") return Optimizer::sgd;
  if (text == "adagrad") return Optimizer::adagrad;
  fail(ErrorKind::invalid_argument, "unknown optimizer '" + std::string(text) + "' (sgd or adagrad)");
}

bool uses_playstyle(PipelineVariant v) {
  return v == PipelineVariant::st_playstyle || v == PipelineVariant::dynamic_playstyle;
}

// ---------------------------------------------------------------------------
// Contexts and encoding

ContextSource ContextSource::none() { return {}; }

ContextSource ContextSource::quarters() {
  ContextSource c;
  c.kind_ = Kind::quarter;
  c.count_ = 4;
  return c;
}

ContextSource ContextSource::playstyles(std::vector<int> cluster_of_player, int clusters) {
  require(clusters >= 1, "cluster count must be >= 1");
  for (int id : cluster_of_player) {
    require(id >= -1 && id < clusters, "cluster id " + std::to_string(id) + " out of range");
  }
  ContextSource c;
  c.kind_ = Kind::playstyle;
  c.count_ = clusters;
  c.cluster_ = std::move(cluster_of_player);
  return c;
}

ContextSource ContextSource::for_variant(PipelineVariant v, const std::vector<int>* cluster_of_player,
                                         int clusters) {
  switch (v) {
    case PipelineVariant::base: return none();
    case PipelineVariant::st_quarter:
    case PipelineVariant::dynamic_quarter: return quarters();
    case PipelineVariant::st_playstyle:
    case PipelineVariant::dynamic_playstyle:
      if (cluster_of_player == nullptr) {
        fail(ErrorKind::invalid_argument,
             std::string(to_string(v)) + " requires a player -> playstyle cluster assignment");
      }
      return playstyles(*cluster_of_player, clusters);
  }
  return none();
}

int ContextSource::context_of(const LabeledSample& s) const {
  switch (kind_) {
    case Kind::none: return 0;
    case Kind::quarter:
      require(s.quarter >= 1 && s.quarter <= 4, "quarter out of range");
      return s.quarter - 1;
    case Kind::playstyle: {
      const int id = s.player >= 0 && static_cast<std::size_t>(s.player) < cluster_.size()
                         ? cluster_[static_cast<std::size_t>(s.player)]
                         : -1;
      if (id < 0) {
        fail(ErrorKind::invalid_argument, "no playstyle cluster for player " + std::to_string(s.player));
      }
      return id;
    }
  }
  return 0;
}

void ContextSource::check_covers(std::span<const LabeledSample> samples) const {
  if (kind_ != Kind::playstyle) return;
  std::vector<int> missing;
  for (const auto& s : samples) {
    const bool known = s.player >= 0 && static_cast<std::size_t>(s.player) < cluster_.size() &&
                       cluster_[static_cast<std::size_t>(s.player)] >= 0;
    if (!known) missing.push_back(s.player);
  }
  if (missing.empty()) return;
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::string list;
  for (int p : missing) list += (list.empty() ? "" : ",") + std::to_string(p);
  fail(ErrorKind::invalid_argument, "missing playstyle cluster for players: " + list);
}

std::vector<SampleEncoding> encode(std::span<const LabeledSample> samples, Variant variant,
                                   const Resolution& res, const ContextSource& contexts,
                                   const EncodingGeometry& geometry) {
  const bool split_contexts = variant != Variant::base && res.contexts > 1;
  if (split_contexts && contexts.count() != res.contexts) {
    fail(ErrorKind::invalid_argument, "resolution has " + std::to_string(res.contexts) +
                                          " contexts but the data source provides " +
                                          std::to_string(contexts.count()));
  }
  const auto spec = DefenderGridSpec::for_grid(res.defender, geometry.defender_frontal_ft,
                                               geometry.defender_lateral_ft);
  std::vector<SampleEncoding> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    SampleEncoding e;
    e.player = s.player;
    e.label = s.label;
    e.context = split_contexts ? contexts.context_of(s) : 0;
    e.court = court_cell(s.bh, geometry.court, res.court);
    if (variant == Variant::dynamic) {
      e.court = extend_cell(e.court, e.context, res.court.cells(), res.contexts);
    }
    e.defenders = defender_cells(s.bh, s.basket, s.defenders, spec);
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Schedules and configuration

Schedule Schedule::defaults(Variant variant, int contexts) {
  const int c = variant == Variant::base ? 1 : contexts;
  const int first = variant == Variant::st ? 1 : c;
  Schedule s;
  s.full_rank = {{{4, 5}, {6, 6}, first}, {{8, 10}, {6, 6}, c}, {{8, 10}, {12, 12}, c}};
  s.low_rank = {{{8, 10}, {12, 12}, c}, {{20, 25}, {12, 12}, c}, {{40, 50}, {12, 12}, c}};
  return s;
}

void Schedule::validate(Variant variant) const {
  require(!full_rank.empty() && !low_rank.empty(), "schedule stages must be non-empty");
  require(full_rank.back() == low_rank.front(),
          "handoff resolution must be both the last full-rank and first low-rank stage");
  auto check_step = [&](const Resolution& a, const Resolution& b) {
    require(b.court.rows >= a.court.rows && b.court.cols >= a.court.cols &&
                b.defender.rows >= a.defender.rows && b.defender.cols >= a.defender.cols,
            "schedule must go from coarse to fine: " + a.str() + " -> " + b.str());
    require(b.contexts == a.contexts || a.contexts == 1,
            "context count can only be finegrained from 1: " + a.str() + " -> " + b.str());
  };
  for (const auto* stages : {&full_rank, &low_rank}) {
    for (const auto& r : *stages) {
      require(r.court.cells() > 0 && r.defender.cells() > 0 && r.contexts >= 1,
              "bad schedule resolution " + r.str());
      require(variant != Variant::base || r.contexts == 1, "base variant uses one context");
    }
    for (std::size_t i = 1; i < stages->size(); ++i) check_step((*stages)[i - 1], (*stages)[i]);
  }
}

void TrainConfig::validate() const {
  require(max_epochs >= 0, "epochs must be >= 0");
  require(lr_full > 0 && lr_low > 0, "learning rates must be positive");
  require(lr_decay > 0 && lr_decay <= 1, "lr_decay must be in (0, 1]");
  require(patience >= 1, "patience must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(rank >= 1, "rank must be >= 1");
  require(lambda >= 0, "lambda must be >= 0");
  require(negative_keep > 0 && negative_keep <= 1, "negative_keep must be in (0, 1]");
  require(cp_iters >= 1, "cp_iters must be >= 1");
  require(init_scale >= 0, "init_scale must be >= 0");
  require(!threshold || (*threshold > 0 && *threshold < 1), "threshold must be in (0, 1)");
  require(geometry.court.depth_ft > 0 && geometry.court.width_ft > 0, "court size must be positive");
  require(geometry.defender_frontal_ft > 0 && geometry.defender_lateral_ft > 0,
          "defender grid extent must be positive");
}

// ---------------------------------------------------------------------------
// Finegraining

namespace {

// Maps a fine court-axis index to its coarse source index.
struct CourtAxisMap {
  FinegrainMap cells;
  int coarse_cells = 0, fine_cells = 0;
  int coarse_contexts = 1, fine_contexts = 1;
  bool blocked = false;

  int source(int fine_index) const {
    if (!blocked) return cells.parent[static_cast<std::size_t>(fine_index)];
    const int f = fine_index / fine_cells;
    const int c = fine_index % fine_cells;
    const int src_f = coarse_contexts == 1 ? 0 : f;
    return src_f * coarse_cells + cells.parent[static_cast<std::size_t>(c)];
  }
};

int context_source(int t, int coarse_contexts) { return coarse_contexts == 1 ? 0 : t; }

void check_finegrain(Variant v, const Resolution& from, const Resolution& to) {
  require(to.contexts == from.contexts || from.contexts == 1,
          "cannot finegrain contexts " + std::to_string(from.contexts) + " -> " +
              std::to_string(to.contexts));
  require(v != Variant::base || to.contexts == 1, "base variant uses one context");
}

CourtAxisMap court_axis_map(Variant v, const Resolution& from, const Resolution& to) {
  CourtAxisMap m{finegrain_map(from.court, to.court), from.court.cells(), to.court.cells(),
                 from.contexts, to.contexts, v == Variant::dynamic};
  return m;
}

}  // namespace

FullRankModel finegrain(const FullRankModel& model, const Resolution& next) {
  check_finegrain(model.variant, model.res, next);
  FullRankModel out = FullRankModel::zeros(model.variant, next, model.players);
  out.bias = model.bias;
  const auto court = court_axis_map(model.variant, model.res, next);
  const auto def = finegrain_map(model.res.defender, next.defender);
  const int t_new = model.variant == Variant::st ? next.contexts : 1;
  const int d1_new = out.court_axis(), d2_new = next.defender.cells();
  const auto old_d1 = static_cast<std::size_t>(model.court_axis());
  const auto old_d2 = static_cast<std::size_t>(model.res.defender.cells());
  const auto old_t = static_cast<std::size_t>(model.variant == Variant::st ? model.res.contexts : 1);
  const auto src = model.weights.values();
  auto dst = out.weights.values();
  std::size_t k = 0;
  for (int i = 0; i < model.players; ++i) {
    for (int t = 0; t < t_new; ++t) {
      const auto st = static_cast<std::size_t>(context_source(t, static_cast<int>(old_t)));
      for (int a = 0; a < d1_new; ++a) {
        const auto sa = static_cast<std::size_t>(court.source(a));
        const std::size_t row = ((static_cast<std::size_t>(i) * old_t + st) * old_d1 + sa) * old_d2;
        for (int b = 0; b < d2_new; ++b) {
          dst[k++] = src[row + static_cast<std::size_t>(def.parent[static_cast<std::size_t>(b)])];
        }
      }
    }
  }
  return out;
}

LowRankModel finegrain(const LowRankModel& model, const Resolution& next) {
  check_finegrain(model.variant, model.res, next);
  LowRankModel out = LowRankModel::zeros(model.variant, next, model.players, model.rank);
  out.bias = model.bias;
  out.A = model.A;
  if (model.variant == Variant::st) {
    for (int t = 0; t < next.contexts; ++t) out.B.row(t) = model.B.row(context_source(t, model.res.contexts));
  }
  const auto court = court_axis_map(model.variant, model.res, next);
  for (Eigen::Index a = 0; a < out.C.rows(); ++a) out.C.row(a) = model.C.row(court.source(static_cast<int>(a)));
  const auto def = finegrain_map(model.res.defender, next.defender);
  for (Eigen::Index b = 0; b < out.D.rows(); ++b) {
    out.D.row(b) = model.D.row(def.parent[static_cast<std::size_t>(b)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage loops

namespace {

struct Encoded {
  std::vector<SampleEncoding> train, validation;
};

Encoded encode_split(const TrainingData& data, Variant variant, const Resolution& res,
                     const TrainConfig& cfg) {
  return {encode(data.split->train, variant, res, data.contexts, cfg.geometry),
          encode(data.split->validation, variant, res, data.contexts, cfg.geometry)};
}

template <class Model>
double monitor_loss(const Model& m, const Encoded& enc) {
  return mean_loss(m, enc.validation.empty() ? enc.train : enc.validation);
}

template <class Model>
Model run_stage(Model model, Encoded enc, const TrainConfig& cfg, double lr, const char* stage,
                std::mt19937_64& rng, TrainReport* report) {
  const auto start = std::chrono::steady_clock::now();
  int epochs_run = 0;
  if (cfg.max_epochs > 0 && !enc.train.empty()) {
    double best_val = monitor_loss(model, enc);
    double prev_val = best_val;
    Model best = model;
    int increases = 0;
    std::vector<SampleEncoding> epoch_set;
    AdagradState adagrad;
    const Optimizer opt = std::is_same_v<Model, FullRankModel> ? cfg.optimizer_full : cfg.optimizer_low;
    AdagradState* state = opt == Optimizer::adagrad ? &adagrad : nullptr;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      std::vector<SampleEncoding>* pool = &enc.train;
      if (cfg.negative_keep < 1.0) {
        std::bernoulli_distribution keep(cfg.negative_keep);
        epoch_set.clear();
        for (const auto& e : enc.train) {
          if (e.label == 1 || keep(rng)) epoch_set.push_back(e);
        }
        pool = &epoch_set;
      }
      std::shuffle(pool->begin(), pool->end(), rng);
      const std::span<const SampleEncoding> all(*pool);
      std::vector<double> weighted;
      for (std::size_t b = 0; b < all.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = all.subspan(b, std::min<std::size_t>(cfg.batch_size, all.size() - b));
        const double l = sgd_step(model, batch, lr, cfg.lambda, state);
        if (!std::isfinite(l)) {
          fail(ErrorKind::numeric, std::string(stage) + "-rank training diverged at epoch " +
                                       std::to_string(epoch) + " (" + model.res.str() + ")");
        }
        weighted.push_back(l * static_cast<double>(batch.size()));
      }
      const double train_loss = all.empty() ? 0.0 : pairwise_sum(weighted) / static_cast<double>(all.size());
      const double val = monitor_loss(model, enc);
      if (!std::isfinite(val)) {
        fail(ErrorKind::numeric, std::string(stage) + "-rank training diverged at epoch " +
                                     std::to_string(epoch) + " (" + model.res.str() + ")");
      }
      ++epochs_run;
      if (report) report->epochs.push_back({stage, model.res, epoch, train_loss, val, lr});
      if (val < best_val) {
        best_val = val;
        best = model;
      } else {
        lr *= cfg.lr_decay;
      }
      if (val > prev_val) {
        if (++increases >= cfg.patience) break;
      } else {
        increases = 0;
      }
      prev_val = val;
    }
    model = std::move(best);
  }
  if (report) {
    const std::chrono::duration<double> secs = std::chrono::steady_clock::now() - start;
    report->timings.push_back({stage, model.res, epochs_run, secs.count()});
  }
  return model;
}

std::mt19937_64 stage_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

FullRankModel train_full_rank(const TrainingData& data, const Schedule& schedule,
                              const TrainConfig& config, Variant variant, TrainReport* report) {
  require(data.split != nullptr, "train_full_rank: no data");
  require(!schedule.full_rank.empty(), "train_full_rank: empty full-rank schedule");
  config.validate();
  FullRankModel model = FullRankModel::zeros(variant, schedule.full_rank.front(), data.players);

  auto rng = stage_rng(config.seed, 1);
  std::uniform_real_distribution<double> init(-config.init_scale, config.init_scale);
  for (double& w : model.weights.values()) w = init(rng);
  const auto& train = data.split->train;
  if (!train.empty()) {
    const double pos = static_cast<double>(std::count_if(
        train.begin(), train.end(), [](const LabeledSample& s) { return s.label == 1; }));
    const double rate = std::clamp(pos / static_cast<double>(train.size()), 1e-6, 1.0 - 1e-6);
    model.bias = std::log(rate / (1.0 - rate));
  }

  for (std::size_t s = 0; s < schedule.full_rank.size(); ++s) {
    const auto& res = schedule.full_rank[s];
    if (s > 0) model = finegrain(model, res);
    model = run_stage(std::move(model), encode_split(data, variant, res, config), config,
                      config.lr_full, "full", rng, report);
  }
  return model;
}

LowRankModel train_low_rank(LowRankModel init, const TrainingData& data, const Schedule& schedule,
                            const TrainConfig& config, TrainReport* report) {
  require(data.split != nullptr, "train_low_rank: no data");
  require(!schedule.low_rank.empty(), "train_low_rank: empty low-rank schedule");
  require(init.res == schedule.low_rank.front(),
          "train_low_rank: model is not at the first low-rank resolution");
  config.validate();
  auto rng = stage_rng(config.seed, 2);
  LowRankModel model = std::move(init);
  for (std::size_t s = 0; s < schedule.low_rank.size(); ++s) {
    const auto& res = schedule.low_rank[s];
    if (s > 0) model = finegrain(model, res);
    model = run_stage(std::move(model), encode_split(data, model.variant, res, config), config,
                      config.lr_low, "low", rng, report);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation

Metrics evaluate_scores(std::span<const double> probabilities, std::span<const int> labels,
                        double threshold) {
  require(!probabilities.empty(), "evaluate: empty sample set");
  require(probabilities.size() == labels.size(), "evaluate: size mismatch");
  require(threshold > 0 && threshold < 1, "evaluate: threshold must be in (0, 1)");
  Metrics m;
  m.threshold = threshold;
  for (std::size_t s = 0; s < probabilities.size(); ++s) {
    const bool pred = probabilities[s] >= threshold;
    const bool pos = labels[s] == 1;
    if (pred && pos) ++m.tp;
    else if (pred) ++m.fp;
    else if (pos) ++m.fn;
    else ++m.tn;
  }
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.tp > 0 ? 2.0 * static_cast<double>(m.tp) / static_cast<double>(2 * m.tp + m.fp + m.fn) : 0.0;
  return m;
}

namespace {

std::vector<int> labels_of(std::span<const SampleEncoding> samples) {
  std::vector<int> y(samples.size());
  std::transform(samples.begin(), samples.end(), y.begin(), [](const SampleEncoding& e) { return e.label; });
  return y;
}

template <class Model>
std::vector<double> predict_impl(const Model& model, std::span<const SampleEncoding> samples) {
  std::vector<double> p(samples.size());
  for (std::size_t s = 0; s < samples.size(); ++s) p[s] = sigmoid(logit(model, samples[s]));
  return p;
}

template <class Model>
Metrics evaluate_impl(const Model& model, std::span<const SampleEncoding> samples, double threshold) {
  require(!samples.empty(), "evaluate: empty sample set");
  const auto p = predict_impl(model, samples);
  Metrics m = evaluate_scores(p, labels_of(samples), threshold);
  m.val_loss = mean_loss(model, samples);
  return m;
}

}  // namespace

std::vector<double> predict(const LowRankModel& model, std::span<const SampleEncoding> samples) {
  return predict_impl(model, samples);
}
std::vector<double> predict(const FullRankModel& model, std::span<const SampleEncoding> samples) {
  return predict_impl(model, samples);
}

Metrics evaluate(const LowRankModel& model, std::span<const SampleEncoding> samples, double threshold) {
  return evaluate_impl(model, samples, threshold);
}
Metrics evaluate(const FullRankModel& model, std::span<const SampleEncoding> samples, double threshold) {
  return evaluate_impl(model, samples, threshold);
}

double tune_threshold_scores(std::span<const double> probabilities, std::span<const int> labels) {
  double best_t = 0.05;
  double best_f1 = -1.0;
  for (int k = 1; k <= 19; ++k) {
    const double t = 0.05 * k;
    const double f1 = evaluate_scores(probabilities, labels, t).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_t = t;
    }
  }
  return best_t;
}

double tune_threshold(const LowRankModel& model, std::span<const SampleEncoding> validation) {
  require(!validation.empty(), "tune_threshold: empty validation set");
  return tune_threshold_scores(predict(model, validation), labels_of(validation));
}

// ---------------------------------------------------------------------------
// Pipeline

PipelineResult run_pipeline(const DatasetSplit& data, int players, const TrainConfig& config,
                            PipelineVariant variant, const Schedule& schedule,
                            const std::vector<int>* cluster_of_player, int clusters) {
  config.validate();
  const Variant mv = model_variant(variant);
  schedule.validate(mv);
  TrainingData td{&data, ContextSource::for_variant(variant, cluster_of_player, clusters), players};
  td.contexts.check_covers(data.train);
  td.contexts.check_covers(data.validation);
  td.contexts.check_covers(data.test);
  for (const auto& r : schedule.low_rank) {
    require(mv == Variant::base || r.contexts == td.contexts.count() || r.contexts == 1,
            "schedule context count does not match the data");
  }

  PipelineResult out;
  out.report.variant = std::string(to_string(variant));
  FullRankModel full = train_full_rank(td, schedule, config, mv, &out.report);
  LowRankModel low = init_lowrank_from_full(full, config.rank, config.seed, config.cp_iters);
  out.report.handoff_error = relative_error(full.weights, as_cp(low));
  low = train_low_rank(std::move(low), td, schedule, config, &out.report);

  const auto& res = schedule.low_rank.back();
  const auto val = encode(data.validation, mv, res, td.contexts, config.geometry);
  const auto test = encode(data.test, mv, res, td.contexts, config.geometry);
  out.threshold = config.threshold ? *config.threshold : (val.empty() ? 0.5 : tune_threshold(low, val));
  if (!val.empty()) out.report.validation = evaluate(low, val, out.threshold);
  if (!test.empty()) out.report.test = evaluate(low, test, out.threshold);
  out.model = std::move(low);
  return out;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

nlohmann::ordered_json metrics_json(const Metrics& m) {
  nlohmann::ordered_json j;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["loss"] = m.val_loss;
  j["threshold"] = m.threshold;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["fn"] = m.fn;
  j["tn"] = m.tn;
  return j;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string TrainReport::to_json(bool include_timings) const {
  nlohmann::ordered_json j;
  j["variant"] = variant;
  j["epochs"] = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    j["epochs"].push_back({{"stage", e.stage},
                           {"resolution", e.res.str()},
                           {"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"val_loss", e.val_loss},
                           {"lr", e.lr}});
  }
  j["handoff_error"] = handoff_error;
  j["validation"] = metrics_json(validation);
  j["test"] = metrics_json(test);
  if (include_timings) {
    j["timings"] = nlohmann::ordered_json::array();
    for (const auto& t : timings) {
      j["timings"].push_back(
          {{"stage", t.stage}, {"resolution", t.res.str()}, {"epochs", t.epochs}, {"seconds", t.seconds}});
    }
  }
  return j.dump(2) + "\n";
}

std::string TrainReport::metrics_csv() const {
  std::string out = "stage,resolution,epoch,train_loss,val_loss,lr\n";
  for (const auto& e : epochs) {
    out += e.stage + "," + e.res.str() + "," + std::to_string(e.epoch) + "," + fmt17(e.train_loss) +
           "," + fmt17(e.val_loss) + "," + fmt17(e.lr) + "\n";
  }
  return out;
}

}  // namespace courtgrid
