#pragma once

// Random models and temporary directories shared by the unit tests.

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "courtgrid/model.hpp"

namespace fixture {

inline void randomize(Eigen::MatrixXd& m, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
}

inline courtgrid::LowRankModel random_lowrank(courtgrid::Variant v, const courtgrid::Resolution& res,
                                              int players, int rank, std::mt19937_64& rng) {
  auto m = courtgrid::LowRankModel::zeros(v, res, players, rank);
  randomize(m.A, rng);
  randomize(m.B, rng);
  randomize(m.C, rng);
  randomize(m.D, rng);
  m.bias = std::uniform_real_distribution<double>(-1, 1)(rng);
  return m;
}

inline courtgrid::FullRankModel random_full(courtgrid::Variant v, const courtgrid::Resolution& res,
                                            int players, std::mt19937_64& rng) {
  auto m = courtgrid::FullRankModel::zeros(v, res, players);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (double& w : m.weights.values()) w = u(rng);
  m.bias = u(rng);
  return m;
}

/// Removed with its contents on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("courtgrid-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixture
