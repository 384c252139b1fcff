#include "courtgrid/synth.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace courtgrid {

void PlantedSpec::validate() const {
  require(players >= 1 && rank >= 1 && contexts >= 1, "planted spec: sizes must be positive");
  require(A.rows() == players && A.cols() == rank, "planted spec: A has the wrong shape");
  require(C.rows() == court.cells() * contexts && C.cols() == rank, "planted spec: C has the wrong shape");
  require(D.rows() == defender.cells() && D.cols() == rank, "planted spec: D has the wrong shape");
  require(min_defenders >= 0 && max_defenders >= min_defenders, "planted spec: bad defender counts");
  require(noise >= 0, "planted spec: noise must be >= 0");
  require(contexts == 1 || contexts == 4, "planted spec: contexts must be 1 or 4 (quarters)");
}

PlantedSpec make_planted(const PlantedOptions& o) {
  require(o.rho >= 0 && o.rho <= 1, "rho must be in [0, 1]");
  PlantedSpec spec;
  spec.players = o.players;
  spec.rank = o.rank;
  spec.contexts = o.contexts;
  spec.court = o.court;
  spec.defender = o.defender;
  spec.bias = o.bias;
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, o.factor_scale);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
    return m;
  };
  spec.A = gaussian(o.players, o.rank);
  const int cells = o.court.cells();
  const Eigen::MatrixXd shared = gaussian(cells, o.rank);
  spec.C.resize(static_cast<Eigen::Index>(cells) * o.contexts, o.rank);
  for (int f = 0; f < o.contexts; ++f) {
    const Eigen::MatrixXd own = gaussian(cells, o.rank);
    spec.C.middleRows(static_cast<Eigen::Index>(f) * cells, cells) =
        o.contexts == 1 ? shared : Eigen::MatrixXd(std::sqrt(o.rho) * shared + std::sqrt(1.0 - o.rho) * own);
  }
  spec.D = gaussian(o.defender.cells(), o.rank);
  spec.validate();
  return spec;
}

namespace {

double planted_logit(const PlantedSpec& spec, const LabeledSample& s) {
  if (s.player < 0 || s.player >= spec.players) {
    fail(ErrorKind::invalid_argument, "sample player " + std::to_string(s.player) + " outside planted spec");
  }
  if (s.quarter < 1 || s.quarter > 4) fail(ErrorKind::invalid_argument, "sample quarter outside planted spec");
  const int f = spec.contexts > 1 ? s.quarter - 1 : 0;
  const int d1 = court_cell(s.bh, spec.geometry.court, spec.court) + f * spec.court.cells();
  const auto grid = DefenderGridSpec::for_grid(spec.defender, spec.geometry.defender_frontal_ft,
                                               spec.geometry.defender_lateral_ft);
  double z = spec.bias;
  for (int d2 : defender_cells(s.bh, s.basket, s.defenders, grid)) {
    for (int k = 0; k < spec.rank; ++k) z += spec.A(s.player, k) * spec.C(d1, k) * spec.D(d2, k);
  }
  return z;
}

}  // namespace

double bayes_oracle(const PlantedSpec& spec, const LabeledSample& sample) {
  return sigmoid(planted_logit(spec, sample));
}

std::vector<LabeledSample> generate(const PlantedSpec& spec, std::size_t n_samples, std::uint64_t seed) {
  spec.validate();
  require(n_samples >= 1, "generate: n_samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> player(0, spec.players - 1);
  std::uniform_int_distribution<int> quarter(1, 4);
  std::uniform_int_distribution<int> count(spec.min_defenders, spec.max_defenders);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto grid = DefenderGridSpec::for_grid(spec.defender, spec.geometry.defender_frontal_ft,
                                               spec.geometry.defender_lateral_ft);
  const double cell_h = grid.frontal_ft / grid.grid.rows;
  const double cell_w = grid.lateral_ft / grid.grid.cols;
  const auto& court = spec.geometry.court;

  std::vector<LabeledSample> out;
  out.reserve(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    LabeledSample s;
    s.game_id = "synth-" + std::to_string(n / 10000);
    s.t = static_cast<double>(n % 10000) * 0.04;
    s.player = player(rng);
    s.quarter = quarter(rng);
    s.basket = spec.basket;
    do {
      s.bh = {unit(rng) * court.width_ft, unit(rng) * court.depth_ft};
    } while (std::hypot(s.bh.x - s.basket.x, s.bh.y - s.basket.y) < 1e-6);
    const double len = std::hypot(s.basket.x - s.bh.x, s.basket.y - s.bh.y);
    const double ux = (s.basket.x - s.bh.x) / len;
    const double uy = (s.basket.y - s.bh.y) / len;
    const int m = count(rng);
    for (int d = 0; d < m; ++d) {
      const double frontal = (unit(rng) * grid.grid.rows - grid.anchor_row) * cell_h;
      const double lateral = (unit(rng) * grid.grid.cols - grid.anchor_col) * cell_w;
      s.defenders.push_back({s.bh.x + frontal * ux + lateral * uy, s.bh.y + frontal * uy - lateral * ux});
    }
    double z = planted_logit(spec, s);
    if (spec.noise > 0) z += spec.noise * normal(rng);
    s.label = unit(rng) < sigmoid(z) ? 1 : 0;
    out.push_back(std::move(s));
  }
  return out;
}

LowRankModel planted_model(const PlantedSpec& spec) {
  spec.validate();
  LowRankModel m = LowRankModel::zeros(spec.variant(), spec.resolution(), spec.players, spec.rank);
  m.A = spec.A;
  m.C = spec.C;
  m.D = spec.D;
  m.bias = spec.bias;
  return m;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const nlohmann::ordered_json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    fail(ErrorKind::parse, "planted matrix has the wrong row count");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorKind::parse, "planted matrix has the wrong column count");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string planted_to_json(const PlantedSpec& spec) {
  nlohmann::ordered_json j;
  j["players"] = spec.players;
  j["rank"] = spec.rank;
  j["contexts"] = spec.contexts;
  j["court"] = spec.court.str();
  j["defender"] = spec.defender.str();
  j["bias"] = spec.bias;
  j["min_defenders"] = spec.min_defenders;
  j["max_defenders"] = spec.max_defenders;
  j["noise"] = spec.noise;
  j["court_depth_ft"] = spec.geometry.court.depth_ft;
  j["court_width_ft"] = spec.geometry.court.width_ft;
  j["defender_frontal_ft"] = spec.geometry.defender_frontal_ft;
  j["defender_lateral_ft"] = spec.geometry.defender_lateral_ft;
  j["basket"] = {spec.basket.x, spec.basket.y};
  j["A"] = matrix_json(spec.A);
  j["C"] = matrix_json(spec.C);
  j["D"] = matrix_json(spec.D);
  return j.dump() + "\n";
}

PlantedSpec planted_from_json(const std::string& text) {
  PlantedSpec spec;
  try {
    const auto j = nlohmann::ordered_json::parse(text);
    spec.players = j.at("players").get<int>();
    spec.rank = j.at("rank").get<int>();
    spec.contexts = j.at("contexts").get<int>();
    spec.court = GridShape::parse(j.at("court").get<std::string>());
    spec.defender = GridShape::parse(j.at("defender").get<std::string>());
    spec.bias = j.at("bias").get<double>();
    spec.min_defenders = j.at("min_defenders").get<int>();
    spec.max_defenders = j.at("max_defenders").get<int>();
    spec.noise = j.at("noise").get<double>();
    spec.geometry.court.depth_ft = j.at("court_depth_ft").get<double>();
    spec.geometry.court.width_ft = j.at("court_width_ft").get<double>();
    spec.geometry.defender_frontal_ft = j.at("defender_frontal_ft").get<double>();
    spec.geometry.defender_lateral_ft = j.at("defender_lateral_ft").get<double>();
    spec.basket = {j.at("basket").at(0).get<double>(), j.at("basket").at(1).get<double>()};
    spec.A = matrix_from(j.at("A"), spec.players, spec.rank);
    spec.C = matrix_from(j.at("C"), static_cast<Eigen::Index>(spec.court.cells()) * spec.contexts, spec.rank);
    spec.D = matrix_from(j.at("D"), spec.defender.cells(), spec.rank);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorKind::parse, std::string("planted spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

void write_planted(const std::filesystem::path& path, const PlantedSpec& spec) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << planted_to_json(spec);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

PlantedSpec read_planted(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return planted_from_json(ss.str());
}

}  // namespace courtgrid
