#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "courtgrid/ingest.hpp"

namespace courtgrid {

struct Standardized {
  Eigen::MatrixXd data;
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd stdev;  // population
};

/// Column-wise z-scores; zero-variance columns become zeros. Needs >= 2 rows.
Standardized standardize(const Eigen::MatrixXd& x);

struct PCAModel {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd components;          // n_components x features, orthonormal rows
  Eigen::VectorXd explained_variance;  // descending

  Eigen::MatrixXd project(const Eigen::MatrixXd& x) const;
};

/// Top eigenvectors of the (population) covariance. Each component's
/// largest-magnitude entry is positive.
PCAModel pca_fit(const Eigen::MatrixXd& x, int n_components = 3);

struct KMeansOptions {
  int k = 7;
  std::uint64_t seed = 0;
  int max_iters = 300;
  int restarts = 10;
};

struct KMeansResult {
  Eigen::MatrixXd centers;  // k x dims
  std::vector<int> assignment;
  double inertia = 0.0;
  /// Inertia after each Lloyd iteration of the winning restart.
  std::vector<double> inertia_history;
};

/// k-means++ seeding plus Lloyd iterations, best of `restarts` by inertia
/// (ties keep the earlier restart).
KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

/// Mean silhouette; singleton clusters contribute 0. Needs >= 2 clusters.
double silhouette(const Eigen::MatrixXd& points, std::span<const int> assignment);

struct ClusterModel {
  Eigen::MatrixXd centers;
  std::vector<std::int64_t> players;  // raw ids, row order of the input
  std::vector<int> assignment;        // cluster id per player
  std::vector<std::string> label_names;
  PCAModel pca;

  std::string name_of(int cluster) const;
};

/// The seven archetype names in the order used when no names are configured.
std::vector<std::string> default_archetype_names();

/// standardize -> PCA(3) -> k-means(k).
ClusterModel assign_playstyles(std::span<const SynergyRow> rows, int k = 7, std::uint64_t seed = 0,
                               std::vector<std::string> names = {});

/// CSV `player,cluster_id,cluster_name`.
void write_assignments(const std::filesystem::path& path, const ClusterModel& model);
std::string assignments_csv(const ClusterModel& model);

struct Assignments {
  std::vector<std::int64_t> players;
  std::vector<int> clusters;
  std::vector<std::string> names;
  int cluster_count = 0;  // max id + 1
};
Assignments read_assignments(const std::filesystem::path& path);
Assignments parse_assignments(std::istream& in);

}  // namespace courtgrid
