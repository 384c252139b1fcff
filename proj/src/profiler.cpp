#include "courtgrid/profiler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace courtgrid {

void sort_profiles(ProfileSet& set) {
  std::stable_sort(set.begin(), set.end(), [](const Heatmap& a, const Heatmap& b) {
    const double wa = std::abs(a.weight), wb = std::abs(b.weight);
    if (wa != wb) return wa > wb;
    return a.k < b.k;
  });
}

namespace {

Heatmap column_heatmap(const LowRankModel& m, int k, Eigen::Index first_row, double scale) {
  Heatmap hm;
  hm.shape = m.res.court;
  hm.k = k;
  const int cells = m.res.court.cells();
  hm.grid.resize(static_cast<std::size_t>(cells));
  for (int d = 0; d < cells; ++d) hm.grid[static_cast<std::size_t>(d)] = scale * m.C(first_row + d, k);
  return hm;
}

void check_player(const LowRankModel& m, int player) {
  if (player < 0 || player >= m.players) {
    fail(ErrorKind::invalid_argument, "player " + std::to_string(player) + " out of range");
  }
}

void truncate(ProfileSet& set, int top_n) {
  require(top_n >= 1, "top_n must be >= 1");
  if (static_cast<int>(set.size()) > top_n) set.resize(static_cast<std::size_t>(top_n));
}

}  // namespace

ProfileSet general_heatmaps(const LowRankModel& model) {
  if (model.variant == Variant::dynamic) {
    fail(ErrorKind::invalid_argument,
         "dynamic models have no shared court factor; use context_heatmaps");
  }
  ProfileSet set;
  for (int k = 0; k < model.rank; ++k) {
    Heatmap hm = column_heatmap(model, k, 0, 1.0);
    hm.weight = model.A.col(k).mean();
    if (model.variant == Variant::st) hm.weight *= model.B.col(k).mean();
    set.push_back(std::move(hm));
  }
  sort_profiles(set);
  return set;
}

ProfileSet player_profiles(const LowRankModel& model, int player, int context, int top_n) {
  check_player(model, player);
  if (model.variant == Variant::dynamic) {
    fail(ErrorKind::invalid_argument, "dynamic models: use context_heatmaps");
  }
  const int contexts = model.variant == Variant::st ? model.res.contexts : 1;
  if (context < 0 || context >= contexts) {
    fail(ErrorKind::invalid_argument, "context " + std::to_string(context) + " out of range");
  }
  ProfileSet set;
  for (int k = 0; k < model.rank; ++k) {
    double w = model.A(player, k);
    if (model.variant == Variant::st) w *= model.B(context, k);
    Heatmap hm = column_heatmap(model, k, 0, w);
    hm.weight = w;
    hm.player = player;
    if (model.variant == Variant::st) hm.context = context;
    set.push_back(std::move(hm));
  }
  sort_profiles(set);
  truncate(set, top_n);
  return set;
}

std::map<int, ProfileSet> context_heatmaps(const LowRankModel& model, int player, int top_n) {
  if (model.variant != Variant::dynamic) {
    fail(ErrorKind::invalid_argument, "context_heatmaps needs a dynamic model");
  }
  check_player(model, player);
  std::map<int, ProfileSet> out;
  const int cells = model.res.court.cells();
  for (int f = 0; f < model.res.contexts; ++f) {
    ProfileSet set;
    for (int k = 0; k < model.rank; ++k) {
      Heatmap hm = column_heatmap(model, k, static_cast<Eigen::Index>(f) * cells, 1.0);
      hm.weight = model.A(player, k);
      hm.player = player;
      hm.context = f;
      hm.block = f;
      set.push_back(std::move(hm));
    }
    sort_profiles(set);
    truncate(set, top_n);
    out.emplace(f, std::move(set));
  }
  return out;
}

double profile_logit(const LowRankModel& model, const SampleEncoding& enc) {
  validate(model, enc);
  if (model.variant == Variant::dynamic) fail(ErrorKind::invalid_argument, "profile_logit: dynamic model");
  const auto set = player_profiles(model, enc.player, enc.context, model.rank);
  double z = model.bias;
  for (const auto& hm : set) {
    double dsum = 0.0;
    for (int d : enc.defenders) dsum += model.D(d, hm.k);
    z += hm.grid[static_cast<std::size_t>(enc.court)] * dsum;
  }
  return z;
}

std::string heatmap_csv(const Heatmap& hm) {
  std::string out;
  char buf[32];
  for (int r = 0; r < hm.shape.rows; ++r) {
    for (int c = 0; c < hm.shape.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", hm.at(r, c));
      if (c > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::array<unsigned char, 3> diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  const auto fade = static_cast<unsigned char>(std::lround(255.0 * (1.0 - std::abs(t))));
  if (t > 0) return {255, fade, fade};
  if (t < 0) return {fade, fade, 255};
  return {255, 255, 255};
}

std::string heatmap_ppm(const Heatmap& hm, int scale) {
  require(scale >= 1, "raster scale must be >= 1");
  double peak = 0.0;
  for (double v : hm.grid) peak = std::max(peak, std::abs(v));
  const int w = hm.shape.cols * scale, h = hm.shape.rows * scale;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(w * h * 3));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = hm.at(y / scale, x / scale);
      const auto rgb = diverging_color(peak > 0 ? v / peak : 0.0);
      out.append(reinterpret_cast<const char*>(rgb.data()), 3);
    }
  }
  return out;
}

void export_heatmap(const Heatmap& hm, const std::filesystem::path& path, HeatmapFormat format,
                    int scale) {
  require(static_cast<int>(hm.grid.size()) == hm.shape.cells(), "heatmap grid does not match its shape");
  const std::string bytes = format == HeatmapFormat::csv ? heatmap_csv(hm) : heatmap_ppm(hm, scale);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

Heatmap parse_heatmap_csv(const std::string& text) {
  Heatmap hm;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    int cols = 0;
    while (std::getline(row, cell, ',')) {
      try {
        hm.grid.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::parse, "bad heatmap value '" + cell + "'");
      }
      ++cols;
    }
    if (hm.shape.rows == 0) hm.shape.cols = cols;
    if (cols != hm.shape.cols) fail(ErrorKind::parse, "ragged heatmap csv");
    ++hm.shape.rows;
  }
  return hm;
}

std::string heatmap_stem(std::string_view variant, const std::string& who, const std::string& context,
                         int k) {
  return std::string(variant) + "_" + who + "_" + context + "_k" + std::to_string(k);
}

}  // namespace courtgrid
