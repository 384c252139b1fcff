#include "cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "courtgrid/courtgrid.h"

namespace fs = std::filesystem;

namespace courtgrid_cli {

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

struct Failure {
  int code;
  std::string message;
};

void check(cg_status s, const std::string& what) {
  if (s == CG_OK) return;
  std::string msg = what;
  const char* detail = cg_last_error();
  if (detail && *detail) msg += ": " + std::string(detail);
  throw Failure{kData, msg};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string metrics_json(const cg_metrics& m) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "{\n  \"f1\": " << num(m.f1) << ",\n  \"precision\": " << num(m.precision)
     << ",\n  \"recall\": " << num(m.recall) << ",\n  \"loss\": " << num(m.loss)
     << ",\n  \"threshold\": " << num(m.threshold) << ",\n  \"tp\": " << m.tp
     << ",\n  \"fp\": " << m.fp << ",\n  \"fn\": " << m.fn << ",\n  \"tn\": " << m.tn << "\n}\n";
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{kData, "cannot write " + path.string()};
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kData, "cannot create " + dir.string() + ": " + ec.message()};
}

fs::path model_file(const std::string& model) {
  fs::path p(model);
  if (fs::is_directory(p)) p /= "model.json";
  return p;
}

std::optional<int> env_threads() {
  const char* v = std::getenv("COURTGRID_THREADS");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024)
    throw Failure{kUsage, std::string("COURTGRID_THREADS must be a positive integer, got '") + v + "'"};
  return static_cast<int>(n);
}

std::string config_text(const cg_config* cfg, cg_status (*get)(const cg_config*, char*, size_t, size_t*)) {
  size_t needed = 0;
  check(get(cfg, nullptr, 0, &needed), "config");
  std::string text(needed, '\0');
  check(get(cfg, text.data(), text.size(), &needed), "config");
  text.resize(needed - 1);
  return text;
}

struct SynthArgs {
  std::string out;
  size_t samples = 200000;
  int players = 20;
  int rank = 3;
  int contexts = 1;
  double rho = 0.3;
  std::string court = "8x10";
  std::string defender = "6x6";
  double scale = 1.0;
  double bias = -1.5;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

std::pair<int, int> parse_grid(const std::string& text, const char* flag) {
  int r = 0, c = 0;
  char x = 0;
  std::istringstream is(text);
  if (!(is >> r >> x >> c) || x != 'x' || !is.eof() || r < 1 || c < 1)
    throw Failure{kUsage, std::string(flag) + " must look like ROWSxCOLS, got '" + text + "'"};
  return {r, c};
}

int run_synth(const SynthArgs& a, std::ostream& out) {
  cg_synth_params p;
  cg_synth_default_params(&p);
  p.samples = a.samples;
  p.players = a.players;
  p.rank = a.rank;
  p.contexts = a.contexts;
  p.rho = a.rho;
  std::tie(p.court_rows, p.court_cols) = parse_grid(a.court, "--court");
  std::tie(p.defender_rows, p.defender_cols) = parse_grid(a.defender, "--defender");
  p.factor_scale = a.scale;
  p.bias = a.bias;
  p.noise = a.noise;
  p.seed = a.seed;
  make_dir(a.out);
  const auto samples = (fs::path(a.out) / "samples.jsonl").string();
  const auto spec = (fs::path(a.out) / "spec.json").string();
  check(cg_synth_write(&p, samples.c_str(), spec.c_str()), "synth");
  out << "wrote " << a.samples << " samples to " << samples << "\n";
  return 0;
}

struct ClusterArgs {
  std::string data;
  std::string out;
  int k = 7;
  std::uint64_t seed = 0;
  std::string names;
};

int run_cluster(const ClusterArgs& a, std::ostream& out) {
  Handle<cg_clusters, cg_clusters_free> c;
  check(cg_clusters_fit(a.data.c_str(), a.k, a.seed, a.names.empty() ? nullptr : a.names.c_str(), &c.p),
        "cluster");
  fs::path dest(a.out);
  if (dest.extension() != ".csv") {
    make_dir(dest);
    dest /= "clusters.csv";
  }
  check(cg_clusters_save(c.p, dest.string().c_str()), "cluster");
  double sil = 0.0;
  check(cg_clusters_silhouette(c.p, &sil), "cluster");
  out << "clustered " << cg_clusters_size(c.p) << " players into " << a.k
      << " playstyles (silhouette " << fixed(sil) << ") -> " << dest.string() << "\n";
  return 0;
}

struct TrainArgs {
  std::string config;
  std::optional<std::string> variant;
  std::optional<int> rank;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> data;
  std::optional<std::string> clusters;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  bool timings = false;
};

int run_train(const TrainArgs& a, std::ostream& out) {
  Handle<cg_config, cg_config_free> cfg;
  check(cg_config_create(&cfg.p), "config");
  if (!a.config.empty()) check(cg_config_load(cfg.p, a.config.c_str()), "config " + a.config);
  auto set = [&](const char* key, const std::string& value) {
    if (cg_config_set(cfg.p, key, value.c_str()) != CG_OK)
      throw Failure{kUsage, std::string(cg_last_error())};
  };
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Failure{kUsage, "--set expects KEY=VALUE, got '" + kv + "'"};
    set(kv.substr(0, eq).c_str(), kv.substr(eq + 1));
  }
  if (a.variant) set("run.variant", *a.variant);
  if (a.rank) set("train.k_rank", std::to_string(*a.rank));
  if (a.lambda) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *a.lambda);
    set("train.lambda", buf);
  }
  if (a.epochs) set("train.epochs", std::to_string(*a.epochs));
  if (a.seed) set("run.seed", std::to_string(*a.seed));
  if (a.threads) set("run.threads", std::to_string(*a.threads));
  else if (auto env = env_threads()) set("run.threads", std::to_string(*env));
  if (a.data) set("paths.data", *a.data);
  if (a.clusters) set("paths.clusters", *a.clusters);
  if (a.out) set("paths.out", *a.out);
  check(cg_config_validate(cfg.p), "config");

  // Read back the resolved paths from the canonical form.
  const std::string ini = config_text(cfg.p, cg_config_to_ini);
  std::string data_path, clusters_path, out_dir, section;
  std::istringstream lines(ini);
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      continue;
    }
    const auto eq = line.find('=');
    if (section != "paths" || eq == std::string::npos) continue;
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());
    if (key == "data") data_path = value;
    else if (key == "clusters") clusters_path = value;
    else if (key == "out") out_dir = value;
  }
  if (data_path.empty()) throw Failure{kUsage, "train needs --data (or paths.data in the config)"};
  if (out_dir.empty()) throw Failure{kUsage, "train needs --out (or paths.out in the config)"};

  Handle<cg_dataset, cg_dataset_free> data;
  check(cg_dataset_load(data_path.c_str(), &data.p), "data " + data_path);
  Handle<cg_clusters, cg_clusters_free> clusters;
  if (!clusters_path.empty())
    check(cg_clusters_load(clusters_path.c_str(), &clusters.p), "clusters " + clusters_path);

  Handle<cg_model, cg_model_free> model;
  Handle<cg_report, cg_report_free> report;
  check(cg_train(cfg.p, data.p, clusters.p, &model.p, &report.p), "train");

  const fs::path dir(out_dir);
  make_dir(dir);
  check(cg_model_save(model.p, (dir / "model.json").string().c_str()), "save model");
  check(cg_report_write_metrics_csv(report.p, (dir / "metrics.csv").string().c_str()), "metrics");
  check(cg_report_write_json(report.p, (dir / "report.json").string().c_str(), 0), "report");
  if (a.timings)
    check(cg_report_write_json(report.p, (dir / "timing.json").string().c_str(), 1), "timings");
  write_file(dir / "config.ini", ini);
  write_file(dir / "fingerprint.txt", config_text(cfg.p, cg_config_fingerprint) + "\n");

  cg_metrics m{};
  check(cg_report_test_metrics(report.p, &m), "metrics");
  out << "test f1 " << fixed(m.f1) << " precision " << fixed(m.precision) << " recall "
      << fixed(m.recall) << " threshold " << fixed(m.threshold) << "\n";
  out << "model written to " << (dir / "model.json").string() << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string model;
  std::string data;
  double threshold = 0.0;
  std::string out;
};

int run_evaluate(const EvaluateArgs& a, std::ostream& out) {
  Handle<cg_model, cg_model_free> model;
  check(cg_model_load(model_file(a.model).string().c_str(), &model.p), "model " + a.model);
  Handle<cg_dataset, cg_dataset_free> data;
  check(cg_dataset_load(a.data.c_str(), &data.p), "data " + a.data);
  cg_metrics m{};
  check(cg_model_evaluate(model.p, data.p, a.threshold, &m), "evaluate");
  const auto json = metrics_json(m);
  if (!a.out.empty()) {
    fs::path dest(a.out);
    if (dest.extension() != ".json") {
      make_dir(dest);
      dest /= "evaluation.json";
    }
    write_file(dest, json);
  }
  out << json;
  return 0;
}

struct HeatmapArgs {
  std::string model;
  std::optional<std::int64_t> player;
  int top = 4;
  std::string out;
  std::string format = "both";
};

int run_heatmap(const HeatmapArgs& a, std::ostream& out) {
  int formats = 0;
  if (a.format == "csv") formats = CG_FORMAT_CSV;
  else if (a.format == "ppm") formats = CG_FORMAT_PPM;
  else formats = CG_FORMAT_CSV | CG_FORMAT_PPM;
  Handle<cg_model, cg_model_free> model;
  check(cg_model_load(model_file(a.model).string().c_str(), &model.p), "model " + a.model);
  size_t written = 0;
  check(cg_model_export_heatmaps(model.p, a.player.has_value(), a.player.value_or(0), a.top,
                                 a.out.c_str(), formats, &written),
        "heatmap");
  out << "wrote " << written << " heatmap files to " << a.out << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"courtgrid: multiresolution tensor models of shot selection", "courtgrid"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cg_version()));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic samples with planted low-rank structure");
  s->add_option("--out", synth.out, "Output directory (samples.jsonl, spec.json)")->required();
  s->add_option("--samples", synth.samples, "Number of samples")->capture_default_str();
  s->add_option("--players", synth.players, "Number of players")->capture_default_str();
  s->add_option("--rank", synth.rank, "Planted rank")->capture_default_str();
  s->add_option("--contexts", synth.contexts, "1, or 4 for quarter-varying court factors")
      ->capture_default_str();
  s->add_option("--rho", synth.rho, "Correlation between quarter blocks")->capture_default_str();
  s->add_option("--court", synth.court, "Court grid ROWSxCOLS")->capture_default_str();
  s->add_option("--defender", synth.defender, "Defender grid ROWSxCOLS")->capture_default_str();
  s->add_option("--factor-scale", synth.scale, "Std-dev of planted factors")->capture_default_str();
  s->add_option("--bias", synth.bias, "Planted bias")->capture_default_str();
  s->add_option("--noise", synth.noise, "Std-dev of logit noise")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();

  ClusterArgs cluster;
  auto* c = app.add_subcommand("cluster", "Cluster players into playstyles from a synergy table");
  c->add_option("--data", cluster.data, "Synergy table CSV")->required();
  c->add_option("--out", cluster.out, "Output CSV file or directory")->required();
  c->add_option("--k", cluster.k, "Number of clusters")->capture_default_str();
  c->add_option("--seed", cluster.seed, "Random seed")->capture_default_str();
  c->add_option("--names", cluster.names, "Comma-separated cluster names");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a multiresolution model");
  t->add_option("--config", train.config, "Config file (sections with key=value)");
  t->add_option("--variant", train.variant, "Model variant")
      ->check(CLI::IsMember({"base", "st_quarter", "st_playstyle", "dynamic_quarter",
                             "dynamic_playstyle"}));
  t->add_option("--k-rank", train.rank, "CP rank");
  t->add_option("--lambda", train.lambda, "Temporal smoothness weight");
  t->add_option("--epochs", train.epochs, "Max epochs per stage");
  t->add_option("--seed", train.seed, "Random seed");
  t->add_option("--threads", train.threads, "Worker threads (default: COURTGRID_THREADS or 1)");
  t->add_option("--data", train.data, "Samples JSONL");
  t->add_option("--clusters", train.clusters, "Playstyle assignments CSV");
  t->add_option("--out", train.out, "Output directory");
  t->add_option("--set", train.sets, "Override a config key, KEY=VALUE (repeatable)");
  t->add_flag("--timings", train.timings, "Also write timing.json with wall-clock stage times");

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Score a trained model on a dataset");
  e->add_option("--model", evaluate.model, "Model directory or model.json")->required();
  e->add_option("--data", evaluate.data, "Samples JSONL")->required();
  e->add_option("--threshold", evaluate.threshold, "Decision threshold (default: tuned)");
  e->add_option("--out", evaluate.out, "Write metrics JSON to this file or directory");

  HeatmapArgs heatmap;
  auto* h = app.add_subcommand("heatmap", "Export court heatmaps of a trained model");
  h->add_option("--model", heatmap.model, "Model directory or model.json")->required();
  h->add_option("--player", heatmap.player, "Raw player id (default: general heatmaps)");
  h->add_option("--top", heatmap.top, "Profiles per context")->capture_default_str();
  h->add_option("--out", heatmap.out, "Output directory")->required();
  h->add_option("--format", heatmap.format, "csv, ppm or both")
      ->check(CLI::IsMember({"csv", "ppm", "both"}))
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (*s) return run_synth(synth, out);
    if (*c) return run_cluster(cluster, out);
    if (*t) return run_train(train, out);
    if (*e) return run_evaluate(evaluate, out);
    if (*h) return run_heatmap(heatmap, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kData;
  }
  err << app.help();
  return kUsage;
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace courtgrid_cli
