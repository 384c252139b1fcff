#include "courtgrid/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace courtgrid {

using ojson = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

ojson matrix_json(const Eigen::MatrixXd& m) {
  ojson j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto data = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = std::move(data);
  return j;
}

Eigen::MatrixXd matrix_from(const ojson& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols) {
    fail(ErrorKind::parse, std::string("model file: factor ") + name + " has the wrong shape");
  }
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols) {
    fail(ErrorKind::parse, std::string("model file: factor ") + name + " has the wrong size");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++].get<double>();
  return m;
}

}  // namespace

ContextSource ModelBundle::contexts() const {
  const int count = model.variant == Variant::base ? 1 : model.res.contexts;
  return ContextSource::for_variant(variant, &player_clusters, count);
}

namespace {
bool same(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}
}  // namespace

bool operator==(const LowRankModel& a, const LowRankModel& b) {
  return a.variant == b.variant && a.res == b.res && a.players == b.players && a.rank == b.rank &&
         same(a.A, b.A) && same(a.B, b.B) && same(a.C, b.C) && same(a.D, b.D) && a.bias == b.bias;
}

std::string model_to_json(const ModelBundle& b) {
  const auto& m = b.model;
  ojson j;
  j["format"] = "courtgrid-model";
  j["version"] = kFormatVersion;
  j["variant"] = std::string(to_string(b.variant));
  j["model_variant"] = std::string(to_string(m.variant));
  j["court"] = m.res.court.str();
  j["defender"] = m.res.defender.str();
  j["contexts"] = m.res.contexts;
  j["players"] = m.players;
  j["rank"] = m.rank;
  j["bias"] = m.bias;
  j["threshold"] = b.threshold;
  j["geometry"] = {{"court_depth_ft", b.geometry.court.depth_ft},
                   {"court_width_ft", b.geometry.court.width_ft},
                   {"defender_frontal_ft", b.geometry.defender_frontal_ft},
                   {"defender_lateral_ft", b.geometry.defender_lateral_ft}};
  j["player_ids"] = b.players.raw_ids();
  j["player_clusters"] = b.player_clusters;
  j["context_names"] = b.context_names;
  j["config_fingerprint"] = b.config_fingerprint;
  j["A"] = matrix_json(m.A);
  j["B"] = matrix_json(m.B);
  j["C"] = matrix_json(m.C);
  j["D"] = matrix_json(m.D);
  return j.dump() + "\n";
}

ModelBundle model_from_json(const std::string& text) {
  ModelBundle b;
  try {
    const auto j = ojson::parse(text);
    if (j.at("format").get<std::string>() != "courtgrid-model") fail(ErrorKind::parse, "not a courtgrid model file");
    if (j.at("version").get<int>() != kFormatVersion) fail(ErrorKind::parse, "unsupported model file version");
    b.variant = parse_pipeline_variant(j.at("variant").get<std::string>());
    const Variant mv = parse_variant(j.at("model_variant").get<std::string>());
    if (mv != model_variant(b.variant)) fail(ErrorKind::parse, "model file: variant tags disagree");
    Resolution res{GridShape::parse(j.at("court").get<std::string>()),
                   GridShape::parse(j.at("defender").get<std::string>()), j.at("contexts").get<int>()};
    b.model = LowRankModel::zeros(mv, res, j.at("players").get<int>(), j.at("rank").get<int>());
    auto& m = b.model;
    m.bias = j.at("bias").get<double>();
    b.threshold = j.at("threshold").get<double>();
    const auto& g = j.at("geometry");
    b.geometry.court.depth_ft = g.at("court_depth_ft").get<double>();
    b.geometry.court.width_ft = g.at("court_width_ft").get<double>();
    b.geometry.defender_frontal_ft = g.at("defender_frontal_ft").get<double>();
    b.geometry.defender_lateral_ft = g.at("defender_lateral_ft").get<double>();
    b.players = PlayerMap(j.at("player_ids").get<std::vector<std::int64_t>>());
    if (b.players.size() != m.players) fail(ErrorKind::parse, "model file: player map size mismatch");
    b.player_clusters = j.at("player_clusters").get<std::vector<int>>();
    b.context_names = j.at("context_names").get<std::vector<std::string>>();
    b.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    m.A = matrix_from(j.at("A"), m.A.rows(), m.A.cols(), "A");
    m.B = matrix_from(j.at("B"), m.B.rows(), m.B.cols(), "B");
    m.C = matrix_from(j.at("C"), m.C.rows(), m.C.cols(), "C");
    m.D = matrix_from(j.at("D"), m.D.rows(), m.D.cols(), "D");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::parse, std::string("model file: ") + e.what());
  }
  return b;
}

void save_model(const std::filesystem::path& path, const ModelBundle& bundle) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << model_to_json(bundle);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace courtgrid
