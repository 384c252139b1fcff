#include "courtgrid/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace courtgrid {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view raw) {
  const std::string text = trim(raw);
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    try {
      std::size_t used = 0;
      v = static_cast<T>(std::stod(text, &used));
      if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_argument, std::string(key) + ": '" + text + "' is not a number");
    }
  } else {
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(ErrorKind::invalid_argument, std::string(key) + ": '" + text + "' is not an integer");
    }
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_schedule(const std::vector<Resolution>& stages) {
  std::string out;
  for (const auto& r : stages) {
    if (!out.empty()) out += ",";
    out += r.court.str() + ":" + r.defender.str() + ":" + std::to_string(r.contexts);
  }
  return out;
}

std::vector<Resolution> parse_schedule(std::string_view text) {
  std::vector<Resolution> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto a = item.find(':');
    const auto b = a == std::string::npos ? a : item.find(':', a + 1);
    if (a == std::string::npos) {
      fail(ErrorKind::invalid_argument, "schedule stage '" + item + "' must be COURT:DEFENDER[:CONTEXTS]");
    }
    Resolution r;
    r.court = GridShape::parse(item.substr(0, a));
    r.defender = GridShape::parse(item.substr(a + 1, b == std::string::npos ? std::string::npos : b - a - 1));
    if (b != std::string::npos) r.contexts = parse_number<int>("schedule contexts", item.substr(b + 1));
    out.push_back(r);
  }
  if (out.empty()) fail(ErrorKind::invalid_argument, "empty schedule");
  return out;
}

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k = {
      "run.variant",        "run.seed",           "run.threads",          "train.optimizer_full",
      "train.optimizer_low", "train.epochs",
      "train.lr_full",      "train.lr_low",       "train.lr_decay",       "train.patience",
      "train.batch_size",   "train.k_rank",       "train.lambda",         "train.negative_keep",
      "train.cp_iters",     "train.init_scale",   "train.threshold",      "schedule.full_rank",
      "schedule.low_rank",  "split.train",        "split.validation",     "split.test",
      "geometry.court_depth_ft", "geometry.court_width_ft", "geometry.defender_frontal_ft",
      "geometry.defender_lateral_ft", "clusters.k", "paths.data",         "paths.clusters",
      "paths.out"};
  return k;
}

void RunConfig::set(std::string_view key, std::string_view raw) {
  const std::string v = trim(raw);
  auto& t = train;
  if (key == "run.variant") variant = parse_pipeline_variant(v);
  else if (key == "run.seed") t.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "run.threads") threads = parse_number<int>(key, v);
  else if (key == "train.optimizer_full") t.optimizer_full = parse_optimizer(v);
  else if (key == "train.optimizer_low") t.optimizer_low = parse_optimizer(v);
  else if (key == "train.epochs") t.max_epochs = parse_number<int>(key, v);
  else if (key == "train.lr_full") t.lr_full = parse_number<double>(key, v);
  else if (key == "train.lr_low") t.lr_low = parse_number<double>(key, v);
  else if (key == "train.lr_decay") t.lr_decay = parse_number<double>(key, v);
  else if (key == "train.patience") t.patience = parse_number<int>(key, v);
  else if (key == "train.batch_size") t.batch_size = parse_number<int>(key, v);
  else if (key == "train.k_rank") t.rank = parse_number<int>(key, v);
  else if (key == "train.lambda") {
    t.lambda = parse_number<double>(key, v);
    lambda_set = true;
  } else if (key == "train.negative_keep") t.negative_keep = parse_number<double>(key, v);
  else if (key == "train.cp_iters") t.cp_iters = parse_number<int>(key, v);
  else if (key == "train.init_scale") t.init_scale = parse_number<double>(key, v);
  else if (key == "train.threshold") {
    if (v == "tune" || v.empty()) t.threshold.reset();
    else t.threshold = parse_number<double>(key, v);
  } else if (key == "schedule.full_rank" || key == "schedule.low_rank") {
    if (!schedule) schedule = Schedule{};
    (key == "schedule.full_rank" ? schedule->full_rank : schedule->low_rank) = parse_schedule(v);
  } else if (key == "split.train") split[0] = parse_number<double>(key, v);
  else if (key == "split.validation") split[1] = parse_number<double>(key, v);
  else if (key == "split.test") split[2] = parse_number<double>(key, v);
  else if (key == "geometry.court_depth_ft") t.geometry.court.depth_ft = parse_number<double>(key, v);
  else if (key == "geometry.court_width_ft") t.geometry.court.width_ft = parse_number<double>(key, v);
  else if (key == "geometry.defender_frontal_ft") t.geometry.defender_frontal_ft = parse_number<double>(key, v);
  else if (key == "geometry.defender_lateral_ft") t.geometry.defender_lateral_ft = parse_number<double>(key, v);
  else if (key == "clusters.k") clusters = parse_number<int>(key, v);
  else if (key == "paths.data") data_path = v;
  else if (key == "paths.clusters") clusters_path = v;
  else if (key == "paths.out") out_dir = v;
  else fail(ErrorKind::invalid_argument, "unknown config key '" + std::string(key) + "'");
}

void RunConfig::load_string(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::parse, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      fail(ErrorKind::invalid_argument, "config key '" + section + "' must be inside a section");
    }
    for (const auto& [name, value] : body) set(section + "." + name, value.data());
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str());
}

int RunConfig::context_count() const {
  switch (variant) {
    case PipelineVariant::base: return 1;
    case PipelineVariant::st_quarter:
    case PipelineVariant::dynamic_quarter: return 4;
    case PipelineVariant::st_playstyle:
    case PipelineVariant::dynamic_playstyle: return clusters;
  }
  return 1;
}

double RunConfig::effective_lambda() const {
  if (lambda_set) return train.lambda;
  return variant == PipelineVariant::dynamic_quarter ? 0.0002 : 0.0;
}

Schedule RunConfig::effective_schedule() const {
  Schedule s = Schedule::defaults(model_variant(variant), context_count());
  if (schedule) {
    if (!schedule->full_rank.empty()) s.full_rank = schedule->full_rank;
    if (!schedule->low_rank.empty()) s.low_rank = schedule->low_rank;
  }
  return s;
}

TrainConfig RunConfig::effective_train() const {
  TrainConfig t = train;
  t.lambda = effective_lambda();
  return t;
}

void RunConfig::validate() const {
  require(threads >= 1, "threads must be >= 1");
  require(clusters >= 2, "clusters.k must be >= 2");
  effective_train().validate();
  effective_schedule().validate(model_variant(variant));
  for (double r : split) require(r > 0, "split ratios must be positive");
  require(std::abs(split[0] + split[1] + split[2] - 1.0) <= 1e-9, "split ratios must sum to 1");
}

std::string RunConfig::to_ini() const {
  const auto t = effective_train();
  const auto s = effective_schedule();
  std::string o;
  o += "[run]\nvariant=" + std::string(to_string(variant)) + "\nseed=" + std::to_string(t.seed) +
       "\nthreads=" + std::to_string(threads) + "\n";
  o += "[train]\noptimizer_full=" + std::string(to_string(t.optimizer_full)) +
       "\noptimizer_low=" + std::string(to_string(t.optimizer_low)) +
       "\nepochs=" + std::to_string(t.max_epochs) + "\nlr_full=" + fmt(t.lr_full) +
       "\nlr_low=" + fmt(t.lr_low) + "\nlr_decay=" + fmt(t.lr_decay) +
       "\npatience=" + std::to_string(t.patience) + "\nbatch_size=" + std::to_string(t.batch_size) +
       "\nk_rank=" + std::to_string(t.rank) + "\nlambda=" + fmt(t.lambda) +
       "\nnegative_keep=" + fmt(t.negative_keep) + "\ncp_iters=" + std::to_string(t.cp_iters) +
       "\ninit_scale=" + fmt(t.init_scale) +
       "\nthreshold=" + (t.threshold ? fmt(*t.threshold) : std::string("tune")) + "\n";
  o += "[schedule]\nfull_rank=" + format_schedule(s.full_rank) +
       "\nlow_rank=" + format_schedule(s.low_rank) + "\n";
  o += "[split]\ntrain=" + fmt(split[0]) + "\nvalidation=" + fmt(split[1]) + "\ntest=" + fmt(split[2]) + "\n";
  o += "[geometry]\ncourt_depth_ft=" + fmt(t.geometry.court.depth_ft) +
       "\ncourt_width_ft=" + fmt(t.geometry.court.width_ft) +
       "\ndefender_frontal_ft=" + fmt(t.geometry.defender_frontal_ft) +
       "\ndefender_lateral_ft=" + fmt(t.geometry.defender_lateral_ft) + "\n";
  o += "[clusters]\nk=" + std::to_string(clusters) + "\n";
  o += "[paths]\ndata=" + data_path + "\nclusters=" + clusters_path + "\nout=" + out_dir + "\n";
  return o;
}

std::string RunConfig::fingerprint() const {
  RunConfig copy = *this;
  copy.threads = 1;
  copy.out_dir.clear();
  return hex64(fnv1a64(copy.to_ini()));
}

}  // namespace courtgrid
