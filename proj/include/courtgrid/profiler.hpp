#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "courtgrid/model.hpp"

namespace courtgrid {

/// A court-shaped matrix (row-major, rows x cols of the court grid).
struct Heatmap {
  GridShape shape;
  std::vector<double> grid;
  double weight = 0.0;
  int k = 0;
  std::optional<int> player;
  std::optional<int> context;
  std::optional<int> block;

  double at(int row, int col) const { return grid[static_cast<std::size_t>(row * shape.cols + col)]; }
};

/// Heatmaps ordered by descending |weight|, ties by ascending k.
using ProfileSet = std::vector<Heatmap>;

void sort_profiles(ProfileSet& set);

/// Raw court-factor columns; weight = mean_i A[i,k] (times mean_t B[t,k] for ST).
ProfileSet general_heatmaps(const LowRankModel& model);

/// Court-factor columns scaled by weight_k = A[i,k] (times B[t,k] for ST).
ProfileSet player_profiles(const LowRankModel& model, int player, int context = 0, int top_n = 4);

/// Dynamic models: for each context block f, the block's raw court-factor
/// columns ranked by weight_k = A[i,k].
std::map<int, ProfileSet> context_heatmaps(const LowRankModel& model, int player, int top_n = 4);

/// sum over all K profiles of weight_k * C[d1,k] * sum_{d2} D[d2,k], plus bias.
/// Equals the model logit for base and ST models.
double profile_logit(const LowRankModel& model, const SampleEncoding& enc);

enum class HeatmapFormat { csv, raster };

/// csv: rows x cols, 9 significant digits. raster: binary PPM (P6), each cell
/// `scale` x `scale` pixels, blue-white-red symmetric about 0.
void export_heatmap(const Heatmap& hm, const std::filesystem::path& path, HeatmapFormat format,
                    int scale = 8);
std::string heatmap_csv(const Heatmap& hm);
std::string heatmap_ppm(const Heatmap& hm, int scale = 8);
/// Maps a value in [-1, 1] to RGB: -1 blue, 0 white, +1 red.
std::array<unsigned char, 3> diverging_color(double t);

/// Parses a heatmap CSV back into a row-major grid.
Heatmap parse_heatmap_csv(const std::string& text);

/// `<variant>_<player|general>_<context>_k<rank>`
std::string heatmap_stem(std::string_view variant, const std::string& who,
                         const std::string& context, int k);

}  // namespace courtgrid
