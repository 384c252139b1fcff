#include "courtgrid/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "courtgrid/common.hpp"

namespace courtgrid {

Standardized standardize(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) fail(ErrorKind::invalid_argument, "standardize needs at least 2 rows");
  Standardized out;
  out.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - out.mean;
  out.stdev = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt();
  out.data = centered;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    // Relative guard: a constant column can leave round-off in `centered`.
    const double scale = std::max(1.0, x.col(c).cwiseAbs().maxCoeff());
    if (out.stdev(c) <= 1e-12 * scale) {
      out.data.col(c).setZero();
    } else {
      out.data.col(c) /= out.stdev(c);
    }
  }
  return out;
}

Eigen::MatrixXd PCAModel::project(const Eigen::MatrixXd& x) const {
  require(x.cols() == mean.size(), "PCA projection: feature count mismatch");
  return (x.rowwise() - mean) * components.transpose();
}

PCAModel pca_fit(const Eigen::MatrixXd& x, int n_components) {
  require(n_components >= 1, "pca_fit: n_components must be >= 1");
  if (x.rows() < n_components || x.cols() < n_components) {
    fail(ErrorKind::invalid_argument, "pca_fit: need at least " + std::to_string(n_components) +
                                          " samples and features");
  }
  PCAModel model;
  model.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorKind::numeric, "pca_fit: eigen-decomposition failed");
  const Eigen::Index d = cov.rows();
  model.components.resize(n_components, d);
  model.explained_variance.resize(n_components);
  for (int c = 0; c < n_components; ++c) {
    const Eigen::Index src = d - 1 - c;  // eigenvalues ascend
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.row(c) = v.transpose();
    model.explained_variance(c) = std::max(0.0, eig.eigenvalues()(src));
  }
  return model;
}

namespace {

struct Run {
  Eigen::MatrixXd centers;
  std::vector<int> assignment;
  double inertia = 0.0;
  std::vector<double> history;
};

double assign(const Eigen::MatrixXd& p, const Eigen::MatrixXd& centers, std::vector<int>& out) {
  std::vector<double> d2(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double d = (p.row(i) - centers.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
    d2[static_cast<std::size_t>(i)] = best;
  }
  return pairwise_sum(d2);
}

Run lloyd(const Eigen::MatrixXd& p, int k, int max_iters, std::mt19937_64& rng) {
  const Eigen::Index n = p.rows();
  Run run;
  run.centers.resize(k, p.cols());
  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  run.centers.row(0) = p.row(first(rng));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) best = std::min(best, (p.row(i) - run.centers.row(j)).squaredNorm());
      dist[static_cast<std::size_t>(i)] = best;
    }
    Eigen::Index pick = 0;
    if (pairwise_sum(dist) > 0) {
      std::discrete_distribution<Eigen::Index> choose(dist.begin(), dist.end());
      pick = choose(rng);
    } else {
      pick = first(rng);
    }
    run.centers.row(c) = p.row(pick);
  }

  run.assignment.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  for (int it = 0; it < max_iters; ++it) {
    run.inertia = assign(p, run.centers, next);
    run.history.push_back(run.inertia);
    if (next == run.assignment) break;
    run.assignment = next;
    for (int c = 0; c < k; ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(p.cols());
      int count = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (run.assignment[static_cast<std::size_t>(i)] == c) {
          sum += p.row(i);
          ++count;
        }
      }
      if (count > 0) run.centers.row(c) = sum / count;  // empty clusters keep their center
    }
  }
  run.assignment = next;
  return run;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options) {
  require(options.k >= 1, "kmeans: k must be >= 1");
  require(options.restarts >= 1 && options.max_iters >= 1, "kmeans: bad iteration settings");
  if (points.rows() < options.k) {
    fail(ErrorKind::invalid_argument, "kmeans: " + std::to_string(points.rows()) +
                                          " points is fewer than k = " + std::to_string(options.k));
  }
  std::mt19937_64 rng(options.seed);
  Run best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    Run run = lloyd(points, options.k, options.max_iters, rng);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return {best.centers, best.assignment, best.inertia, best.history};
}

double silhouette(const Eigen::MatrixXd& points, std::span<const int> assignment) {
  require(static_cast<Eigen::Index>(assignment.size()) == points.rows(), "silhouette: size mismatch");
  int clusters = 0;
  for (int a : assignment) {
    require(a >= 0, "silhouette: negative cluster id");
    clusters = std::max(clusters, a + 1);
  }
  std::vector<int> sizes(static_cast<std::size_t>(clusters), 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  const auto nonempty = std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; });
  if (nonempty < 2) fail(ErrorKind::invalid_argument, "silhouette needs at least 2 clusters");

  const Eigen::Index n = points.rows();
  std::vector<double> scores(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sum(static_cast<std::size_t>(clusters));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int own = assignment[static_cast<std::size_t>(i)];
    if (sizes[static_cast<std::size_t>(own)] <= 1) continue;
    std::fill(sum.begin(), sum.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sum[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] += (points.row(i) - points.row(j)).norm();
    }
    const double a = sum[static_cast<std::size_t>(own)] / (sizes[static_cast<std::size_t>(own)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < clusters; ++c) {
      if (c == own || sizes[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sum[static_cast<std::size_t>(c)] / sizes[static_cast<std::size_t>(c)]);
    }
    const double m = std::max(a, b);
    scores[static_cast<std::size_t>(i)] = m > 0 ? (b - a) / m : 0.0;
  }
  return pairwise_sum(scores) / static_cast<double>(n);
}

std::vector<std::string> default_archetype_names() {
  return {"Ball-Handling Guards", "Catch & Shoot Guards", "Perimeter Wings", "Versatile Wings",
          "Stretch 4s",           "Rolling Bigs",         "Post-Up Bigs"};
}

std::string ClusterModel::name_of(int cluster) const {
  if (cluster >= 0 && static_cast<std::size_t>(cluster) < label_names.size()) {
    return label_names[static_cast<std::size_t>(cluster)];
  }
  return "cluster_" + std::to_string(cluster);
}

ClusterModel assign_playstyles(std::span<const SynergyRow> rows, int k, std::uint64_t seed,
                               std::vector<std::string> names) {
  if (static_cast<int>(rows.size()) < k) {
    fail(ErrorKind::invalid_argument, "assign_playstyles: " + std::to_string(rows.size()) +
                                          " players is fewer than k = " + std::to_string(k));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), kSynergyFeatures);
  ClusterModel model;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < kSynergyFeatures; ++c) {
      x(static_cast<Eigen::Index>(r), c) = rows[r].features[static_cast<std::size_t>(c)];
    }
    model.players.push_back(rows[r].player);
  }
  const auto z = standardize(x);
  model.pca = pca_fit(z.data, 3);
  KMeansOptions opts;
  opts.k = k;
  opts.seed = seed;
  const auto km = kmeans(model.pca.project(z.data), opts);
  model.centers = km.centers;
  model.assignment = km.assignment;
  if (names.empty() && k == 7) names = default_archetype_names();
  model.label_names = std::move(names);
  return model;
}

std::string assignments_csv(const ClusterModel& model) {
  std::string out = "player,cluster_id,cluster_name\n";
  for (std::size_t p = 0; p < model.players.size(); ++p) {
    out += std::to_string(model.players[p]) + "," + std::to_string(model.assignment[p]) + "," +
           model.name_of(model.assignment[p]) + "\n";
  }
  return out;
}

void write_assignments(const std::filesystem::path& path, const ClusterModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << assignments_csv(model);
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

Assignments parse_assignments(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::parse, "assignment file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "player,cluster_id,cluster_name") {
    fail(ErrorKind::parse, "assignment header must be player,cluster_id,cluster_name");
  }
  Assignments a;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos) fail(ErrorKind::parse, "assignment line " + std::to_string(line_no) + " is malformed");
    try {
      a.players.push_back(std::stoll(line.substr(0, c1)));
      const int id = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
      if (id < 0) throw std::invalid_argument("negative");
      a.clusters.push_back(id);
    } catch (const std::exception&) {
      fail(ErrorKind::parse, "assignment line " + std::to_string(line_no) + " is malformed");
    }
    a.names.push_back(line.substr(c2 + 1));
    a.cluster_count = std::max(a.cluster_count, a.clusters.back() + 1);
  }
  return a;
}

Assignments read_assignments(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return parse_assignments(in);
}

}  // namespace courtgrid
