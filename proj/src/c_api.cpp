#include "courtgrid/courtgrid.h"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "courtgrid/cluster.hpp"
#include "courtgrid/ingest.hpp"
#include "courtgrid/parallel.hpp"
#include "courtgrid/profiler.hpp"
#include "courtgrid/run_config.hpp"
#include "courtgrid/serialize.hpp"
#include "courtgrid/synth.hpp"
#include "courtgrid/trainer.hpp"

namespace cg = courtgrid;

struct cg_dataset {
  cg::SampleSet set;
};

struct cg_config {
  cg::RunConfig config;
};

struct cg_model {
  cg::ModelBundle bundle;
};

struct cg_report {
  cg::TrainReport report;
};

struct cg_clusters {
  cg::Assignments assignments;
  double silhouette = 0.0;
  bool has_silhouette = false;
};

namespace {

thread_local std::string last_error;

cg_status status_of(cg::ErrorKind kind) {
  switch (kind) {
    case cg::ErrorKind::invalid_argument: return CG_ERR_INVALID_ARGUMENT;
    case cg::ErrorKind::parse: return CG_ERR_PARSE;
    case cg::ErrorKind::io: return CG_ERR_IO;
    case cg::ErrorKind::numeric: return CG_ERR_NUMERIC;
  }
  return CG_ERR_INTERNAL;
}

template <class F>
cg_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return CG_OK;
  } catch (const cg::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CG_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return CG_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) cg::fail(cg::ErrorKind::invalid_argument, std::string(name) + " is null");
}

void copy_out(const std::string& text, char* buf, size_t capacity, size_t* needed) {
  if (needed != nullptr) *needed = text.size() + 1;
  if (buf != nullptr && capacity > 0) {
    const size_t n = std::min(capacity - 1, text.size());
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) cg::fail(cg::ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) cg::fail(cg::ErrorKind::io, "write failed: " + path.string());
}

void fill(cg_metrics* out, const cg::Metrics& m) {
  out->f1 = m.f1;
  out->precision = m.precision;
  out->recall = m.recall;
  out->loss = m.val_loss;
  out->threshold = m.threshold;
  out->tp = m.tp;
  out->fp = m.fp;
  out->fn = m.fn;
  out->tn = m.tn;
}

// Dataset samples carry dense ids of the dataset's own map; the model has its own.
std::vector<cg::LabeledSample> remap(const cg::SampleSet& set, const cg::PlayerMap& model_players) {
  std::vector<cg::LabeledSample> out = set.samples;
  std::vector<std::int64_t> unknown;
  std::vector<int> dense(static_cast<size_t>(set.players.size()), -1);
  for (int p = 0; p < set.players.size(); ++p) {
    auto found = model_players.find(set.players.raw(p));
    if (found) dense[static_cast<size_t>(p)] = *found;
    else unknown.push_back(set.players.raw(p));
  }
  if (!unknown.empty()) {
    std::string msg = "players not known to the model:";
    for (size_t i = 0; i < unknown.size() && i < 20; ++i) msg += " " + std::to_string(unknown[i]);
    if (unknown.size() > 20) msg += " ...";
    cg::fail(cg::ErrorKind::invalid_argument, msg);
  }
  for (auto& s : out) s.player = dense[static_cast<size_t>(s.player)];
  return out;
}

std::vector<cg::SampleEncoding> encode_for(const cg::ModelBundle& b, const cg::SampleSet& set) {
  const auto samples = remap(set, b.players);
  const auto contexts = b.contexts();
  contexts.check_covers(samples);
  return cg::encode(samples, b.model.variant, b.model.res, contexts, b.geometry);
}

std::string file_label(std::string s) {
  for (char& c : s) {
    const auto u = static_cast<unsigned char>(c);
    c = std::isalnum(u) ? static_cast<char>(std::tolower(u)) : '-';
  }
  return s;
}

std::string context_label(const cg::ModelBundle& b, int context) {
  if (context < static_cast<int>(b.context_names.size()))
    return file_label(b.context_names[static_cast<size_t>(context)]);
  return "c" + std::to_string(context);
}

}  // namespace

extern "C" {

const char* cg_last_error(void) { return last_error.c_str(); }

const char* cg_version(void) { return "0.1.0"; }

cg_status cg_set_threads(int threads) {
  return guarded([&] {
    cg::require(threads >= 1, "thread count must be >= 1");
    cg::set_num_threads(threads);
  });
}

cg_status cg_dataset_load(const char* path, cg_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto d = std::make_unique<cg_dataset>();
    d->set = cg::parse_samples(std::filesystem::path(path));
    *out = d.release();
  });
}

void cg_dataset_free(cg_dataset* data) { delete data; }

size_t cg_dataset_size(const cg_dataset* data) { return data ? data->set.samples.size() : 0; }

int cg_dataset_players(const cg_dataset* data) { return data ? data->set.players.size() : 0; }

size_t cg_dataset_positives(const cg_dataset* data) {
  if (!data) return 0;
  return static_cast<size_t>(std::count_if(data->set.samples.begin(), data->set.samples.end(),
                                           [](const auto& s) { return s.label == 1; }));
}

void cg_synth_default_params(cg_synth_params* p) {
  if (!p) return;
  const cg::PlantedOptions o;
  p->players = o.players;
  p->rank = o.rank;
  p->contexts = o.contexts;
  p->rho = o.rho;
  p->court_rows = o.court.rows;
  p->court_cols = o.court.cols;
  p->defender_rows = o.defender.rows;
  p->defender_cols = o.defender.cols;
  p->factor_scale = o.factor_scale;
  p->bias = o.bias;
  p->noise = 0.0;
  p->seed = 0;
  p->samples = 10000;
}

cg_status cg_synth_write(const cg_synth_params* p, const char* samples_path, const char* spec_path) {
  return guarded([&] {
    need(p, "params");
    need(samples_path, "samples_path");
    cg::PlantedOptions o;
    o.players = p->players;
    o.rank = p->rank;
    o.contexts = p->contexts;
    o.rho = p->rho;
    o.court = {p->court_rows, p->court_cols};
    o.defender = {p->defender_rows, p->defender_cols};
    o.factor_scale = p->factor_scale;
    o.bias = p->bias;
    o.seed = p->seed;
    cg::require(p->contexts == 1 || p->contexts == 4, "contexts must be 1 or 4");
    cg::require(p->samples > 0, "sample count must be positive");
    cg::require(p->noise >= 0.0, "noise must be >= 0");
    auto spec = cg::make_planted(o);
    spec.noise = p->noise;
    spec.validate();
    cg::SampleSet set;
    set.samples = cg::generate(spec, p->samples, p->seed);
    set.players = cg::PlayerMap::identity(spec.players);
    cg::write_samples(std::filesystem::path(samples_path), set);
    if (spec_path != nullptr) cg::write_planted(spec_path, spec);
  });
}

cg_status cg_clusters_fit(const char* synergy_path, int k, uint64_t seed, const char* names_csv,
                          cg_clusters** out) {
  return guarded([&] {
    need(synergy_path, "synergy_path");
    need(out, "out");
    *out = nullptr;
    cg::require(k >= 2, "cluster count must be >= 2");
    std::vector<std::string> names;
    if (names_csv != nullptr && *names_csv != '\0') {
      std::stringstream ss(names_csv);
      std::string name;
      while (std::getline(ss, name, ',')) names.push_back(name);
    }
    const auto rows = cg::parse_synergy_table(std::filesystem::path(synergy_path));
    cg::require(static_cast<int>(rows.size()) >= k,
                "need at least " + std::to_string(k) + " players to form " + std::to_string(k) +
                    " clusters, got " + std::to_string(rows.size()));
    const auto model = cg::assign_playstyles(rows, k, seed, names);
    auto c = std::make_unique<cg_clusters>();
    std::stringstream csv(cg::assignments_csv(model));
    c->assignments = cg::parse_assignments(csv);
    const auto x = [&] {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cg::kSynergyFeatures);
      for (size_t i = 0; i < rows.size(); ++i)
        for (int f = 0; f < cg::kSynergyFeatures; ++f)
          m(static_cast<Eigen::Index>(i), f) = rows[i].features[static_cast<size_t>(f)];
      return model.pca.project(cg::standardize(m).data);
    }();
    c->silhouette = cg::silhouette(x, model.assignment);
    c->has_silhouette = true;
    *out = c.release();
  });
}

cg_status cg_clusters_load(const char* path, cg_clusters** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto c = std::make_unique<cg_clusters>();
    c->assignments = cg::read_assignments(path);
    *out = c.release();
  });
}

cg_status cg_clusters_save(const cg_clusters* c, const char* path) {
  return guarded([&] {
    need(c, "clusters");
    need(path, "path");
    std::string text = "player,cluster_id,cluster_name\n";
    const auto& a = c->assignments;
    for (size_t i = 0; i < a.players.size(); ++i) {
      const int id = a.clusters[i];
      text += std::to_string(a.players[i]) + "," + std::to_string(id) + "," +
              a.names[static_cast<size_t>(id)] + "\n";
    }
    write_text(path, text);
  });
}

cg_status cg_clusters_silhouette(const cg_clusters* c, double* out) {
  return guarded([&] {
    need(c, "clusters");
    need(out, "out");
    cg::require(c->has_silhouette, "silhouette is only available for freshly fitted clusters");
    *out = c->silhouette;
  });
}

size_t cg_clusters_size(const cg_clusters* c) { return c ? c->assignments.players.size() : 0; }

void cg_clusters_free(cg_clusters* c) { delete c; }

cg_status cg_config_create(cg_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new cg_config();
  });
}

void cg_config_free(cg_config* config) { delete config; }

cg_status cg_config_set(cg_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->config.set(key, value);
  });
}

cg_status cg_config_load(cg_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->config.load_file(path);
  });
}

cg_status cg_config_validate(const cg_config* config) {
  return guarded([&] {
    need(config, "config");
    config->config.validate();
  });
}

cg_status cg_config_to_ini(const cg_config* config, char* buf, size_t capacity, size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->config.to_ini(), buf, capacity, needed);
  });
}

cg_status cg_config_fingerprint(const cg_config* config, char* buf, size_t capacity,
                                size_t* needed) {
  return guarded([&] {
    need(config, "config");
    copy_out(config->config.fingerprint(), buf, capacity, needed);
  });
}

cg_status cg_train(const cg_config* config, const cg_dataset* data, const cg_clusters* clusters,
                   cg_model** model, cg_report** report) {
  return guarded([&] {
    need(config, "config");
    need(data, "dataset");
    need(model, "model");
    *model = nullptr;
    if (report) *report = nullptr;
    const auto& rc = config->config;
    rc.validate();
    cg::set_num_threads(rc.threads);
    const auto& set = data->set;
    cg::require(set.samples.size() >= 10, "dataset needs at least 10 samples");

    std::vector<int> cluster_of;
    std::vector<std::string> context_names;
    int cluster_count = rc.clusters;
    const bool playstyle = cg::uses_playstyle(rc.variant);
    if (playstyle) {
      cg::require(clusters != nullptr, std::string("variant ") +
                                           std::string(cg::to_string(rc.variant)) +
                                           " needs playstyle cluster assignments");
      const auto& a = clusters->assignments;
      cg::require(a.cluster_count <= cluster_count,
                  "cluster assignments use " + std::to_string(a.cluster_count) +
                      " clusters but the config allows " + std::to_string(cluster_count));
      std::map<std::int64_t, int> by_raw;
      for (size_t i = 0; i < a.players.size(); ++i) by_raw[a.players[i]] = a.clusters[i];
      cluster_of.assign(static_cast<size_t>(set.players.size()), -1);
      for (int p = 0; p < set.players.size(); ++p) {
        auto it = by_raw.find(set.players.raw(p));
        if (it != by_raw.end()) cluster_of[static_cast<size_t>(p)] = it->second;
      }
      for (int c = 0; c < cluster_count; ++c)
        context_names.push_back(c < static_cast<int>(a.names.size()) && !a.names[static_cast<size_t>(c)].empty()
                                    ? a.names[static_cast<size_t>(c)]
                                    : "c" + std::to_string(c));
    } else if (rc.variant != cg::PipelineVariant::base) {
      context_names = {"q1", "q2", "q3", "q4"};
    }

    const auto split = cg::split_dataset(set.samples, rc.split, rc.train.seed);
    auto result = cg::run_pipeline(split, set.players.size(), rc.effective_train(), rc.variant,
                                   rc.effective_schedule(), playstyle ? &cluster_of : nullptr,
                                   cluster_count);
    auto m = std::make_unique<cg_model>();
    auto& b = m->bundle;
    b.variant = rc.variant;
    b.model = std::move(result.model);
    b.players = set.players;
    b.threshold = result.threshold;
    b.geometry = rc.effective_train().geometry;
    b.player_clusters = std::move(cluster_of);
    b.context_names = std::move(context_names);
    b.config_fingerprint = rc.fingerprint();
    if (report) {
      auto r = std::make_unique<cg_report>();
      r->report = std::move(result.report);
      *report = r.release();
    }
    *model = m.release();
  });
}

cg_status cg_report_write_json(const cg_report* report, const char* path, int include_timings) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    write_text(path, report->report.to_json(include_timings != 0));
  });
}

cg_status cg_report_write_metrics_csv(const cg_report* report, const char* path) {
  return guarded([&] {
    need(report, "report");
    need(path, "path");
    write_text(path, report->report.metrics_csv());
  });
}

cg_status cg_report_test_metrics(const cg_report* report, cg_metrics* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    fill(out, report->report.test);
  });
}

void cg_report_free(cg_report* report) { delete report; }

cg_status cg_model_save(const cg_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    cg::save_model(path, model->bundle);
  });
}

cg_status cg_model_load(const char* path, cg_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto m = std::make_unique<cg_model>();
    m->bundle = cg::load_model(path);
    *out = m.release();
  });
}

void cg_model_free(cg_model* model) { delete model; }

double cg_model_threshold(const cg_model* model) { return model ? model->bundle.threshold : 0.0; }

int cg_model_rank(const cg_model* model) { return model ? model->bundle.model.rank : 0; }

cg_status cg_model_evaluate(const cg_model* model, const cg_dataset* data, double threshold,
                            cg_metrics* out) {
  return guarded([&] {
    need(model, "model");
    need(data, "dataset");
    need(out, "out");
    cg::require(threshold < 1.0, "threshold must be < 1");
    const auto& b = model->bundle;
    const auto enc = encode_for(b, data->set);
    fill(out, cg::evaluate(b.model, enc, threshold > 0.0 ? threshold : b.threshold));
  });
}

cg_status cg_model_predict(const cg_model* model, const cg_dataset* data, double* out,
                           size_t capacity) {
  return guarded([&] {
    need(model, "model");
    need(data, "dataset");
    need(out, "out");
    cg::require(capacity >= data->set.samples.size(), "output buffer too small");
    const auto enc = encode_for(model->bundle, data->set);
    const auto p = cg::predict(model->bundle.model, enc);
    std::copy(p.begin(), p.end(), out);
  });
}

cg_status cg_model_export_heatmaps(const cg_model* model, int has_player, int64_t player,
                                   int top_n, const char* out_dir, int formats,
                                   size_t* files_written) {
  return guarded([&] {
    need(model, "model");
    need(out_dir, "out_dir");
    cg::require(top_n >= 1, "top must be >= 1");
    cg::require((formats & (CG_FORMAT_CSV | CG_FORMAT_PPM)) != 0 &&
                    (formats & ~(CG_FORMAT_CSV | CG_FORMAT_PPM)) == 0,
                "unknown heatmap format mask");
    const auto& b = model->bundle;
    const auto& m = b.model;
    const std::string variant(cg::to_string(b.variant));
    std::vector<std::pair<std::string, cg::ProfileSet>> groups;  // context label, profiles
    std::string who = "general";
    if (!has_player) {
      auto set = cg::general_heatmaps(m);
      if (static_cast<int>(set.size()) > top_n) set.resize(static_cast<size_t>(top_n));
      groups.emplace_back("all", std::move(set));
    } else {
      const auto dense = b.players.find(player);
      if (!dense) cg::fail(cg::ErrorKind::invalid_argument,
                           "player " + std::to_string(player) + " is not in the model");
      who = std::to_string(player);
      if (m.variant == cg::Variant::base) {
        groups.emplace_back("all", cg::player_profiles(m, *dense, 0, top_n));
      } else if (m.variant == cg::Variant::st) {
        for (int t = 0; t < m.res.contexts; ++t)
          groups.emplace_back(context_label(b, t), cg::player_profiles(m, *dense, t, top_n));
      } else {
        for (auto& [f, set] : cg::context_heatmaps(m, *dense, top_n))
          groups.emplace_back(context_label(b, f), std::move(set));
      }
    }
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) cg::fail(cg::ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
    size_t written = 0;
    for (const auto& [context, set] : groups) {
      for (const auto& hm : set) {
        const auto stem = cg::heatmap_stem(variant, who, context, hm.k);
        if (formats & CG_FORMAT_CSV) {
          cg::export_heatmap(hm, dir / (stem + ".csv"), cg::HeatmapFormat::csv);
          ++written;
        }
        if (formats & CG_FORMAT_PPM) {
          cg::export_heatmap(hm, dir / (stem + ".ppm"), cg::HeatmapFormat::raster);
          ++written;
        }
      }
    }
    if (files_written) *files_written = written;
  });
}

}  // extern "C"
