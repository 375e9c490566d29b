#include "semplan/grid_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "semplan/error.hpp"
#include "semplan/format.hpp"
#include "semplan/rng.hpp"

namespace semplan {

namespace {

constexpr const char* kMapMagic = "SEMPLAN-MAP";
constexpr int kMapVersion = 1;

std::vector<double> box_blur(const std::vector<double>& in, int w, int h) {
  std::vector<double> out(in.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          sum += in[static_cast<std::size_t>(ny) * w + nx];
          ++n;
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = sum / n;
    }
  }
  return out;
}

std::vector<double> smoothed_noise(Rng& rng, int w, int h, int passes) {
  std::vector<double> field(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  for (double& v : field) v = rng.uniform();
  for (int p = 0; p < passes; ++p) field = box_blur(field, w, h);
  return field;
}

}  // namespace

GridMap::GridMap(int width, int height, std::vector<double> tau, double tau_min,
                 int region_rows, int region_cols)
    : width_(width),
      height_(height),
      tau_min_(tau_min),
      region_rows_(region_rows),
      region_cols_(region_cols),
      tau_(std::move(tau)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (tau_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("tau size does not match map dimensions");
  }
  if (!(tau_min > 0.0 && tau_min <= 1.0)) throw std::invalid_argument("tau_min must be in (0, 1]");
  for (double t : tau_) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw std::out_of_range("traversability out of [0, 1]: " + format_double(t));
    }
  }
  if (region_rows < 1 || region_cols < 1) throw std::invalid_argument("region grid must be >= 1x1");
  if (region_rows > height || region_cols > width) {
    throw std::invalid_argument("more region tiles than cells along an axis");
  }
  const auto row_starts = balanced_split(height, region_rows);
  const auto col_starts = balanced_split(width, region_cols);
  region_.resize(tau_.size());
  int tile_row = 0;
  for (int y = 0; y < height; ++y) {
    while (y >= row_starts[tile_row + 1]) ++tile_row;
    int tile_col = 0;
    for (int x = 0; x < width; ++x) {
      while (x >= col_starts[tile_col + 1]) ++tile_col;
      region_[static_cast<std::size_t>(y) * width + x] =
          static_cast<std::uint32_t>(tile_row * region_cols + tile_col);
    }
  }
}

std::size_t GridMap::obstacle_count() const {
  return static_cast<std::size_t>(
      std::count_if(tau_.begin(), tau_.end(), [&](double t) { return t < tau_min_; }));
}

GridMap GridMap::with_tau(std::vector<double> tau) const {
  return GridMap(width_, height_, std::move(tau), tau_min_, region_rows_, region_cols_);
}

std::vector<int> balanced_split(int length, int parts) {
  if (parts < 1 || parts > length) {
    throw std::invalid_argument("cannot split " + std::to_string(length) + " cells into " +
                                std::to_string(parts) + " tiles");
  }
  std::vector<int> starts(static_cast<std::size_t>(parts) + 1);
  const int base = length / parts;
  const int extra = length % parts;
  for (int i = 0; i < parts; ++i) starts[i + 1] = starts[i] + base + (i < extra ? 1 : 0);
  return starts;
}

GridMap partition_regions(const GridMap& map, int rows, int cols) {
  std::vector<double> tau(map.tau_values().begin(), map.tau_values().end());
  return GridMap(map.width(), map.height(), std::move(tau), map.tau_min(), rows, cols);
}

GridMap generate_map(std::uint64_t seed, int width, int height, double obstacle_density,
                     int smoothing_passes) {
  if (width < 2 || height < 2) throw std::invalid_argument("generated maps need at least 2x2 cells");
  if (!(obstacle_density >= 0.0 && obstacle_density <= 1.0)) {
    throw std::invalid_argument("obstacle density must be in [0, 1]");
  }
  if (smoothing_passes < 0) throw std::invalid_argument("smoothing passes must be >= 0");

  Rng rng(seed, Stream::kMap);
  const auto field = smoothed_noise(rng, width, height, smoothing_passes);
  const std::size_t n = field.size();
  const auto n_obstacles = static_cast<std::size_t>(std::llround(obstacle_density * static_cast<double>(n)));

  std::vector<double> tau(n, 1.0);
  if (n_obstacles > 0) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    // Stable on index so equal noise values resolve identically on every platform.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return field[a] < field[b]; });
    for (std::size_t k = 0; k < n_obstacles; ++k) tau[order[k]] = 0.0;
    if (n_obstacles < n) {
      const double lo = field[order[n_obstacles]];
      const double hi = field[order[n - 1]];
      const double span = hi > lo ? hi - lo : 1.0;
      for (std::size_t k = n_obstacles; k < n; ++k) {
        const std::size_t i = order[k];
        const double ramp = std::clamp((field[i] - lo) / span, 0.0, 1.0);
        tau[i] = kDefaultTauMin + (1.0 - kDefaultTauMin) * ramp;
      }
    }
  }
  return GridMap(width, height, std::move(tau));
}

GapCorridor generate_gap_corridor(std::uint64_t seed, const GapCorridorSpec& spec) {
  const int w = spec.width, h = spec.height;
  if (w < 2 * spec.endpoint_margin + spec.wall_thickness + 2 || h < spec.gap_width + 2) {
    throw std::invalid_argument("gap corridor map too small for its wall and margins");
  }
  if (!(spec.tau_low >= kDefaultTauMin && spec.tau_low <= spec.tau_high && spec.tau_high <= 1.0)) {
    throw std::invalid_argument("gap corridor tau range must satisfy tau_min <= low <= high <= 1");
  }
  Rng rng(seed, Stream::kMap);
  const auto field = smoothed_noise(rng, w, h, spec.smoothing_passes);
  const auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
  const double lo = *lo_it;
  const double span = *hi_it > lo ? *hi_it - lo : 1.0;

  std::vector<double> tau(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    tau[i] = spec.tau_low + (spec.tau_high - spec.tau_low) * ((field[i] - lo) / span);
  }

  const int wall_x0 = (w - spec.wall_thickness) / 2;
  const int gap_y0 = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h - spec.gap_width - 1)));
  for (int y = 0; y < h; ++y) {
    if (y >= gap_y0 && y < gap_y0 + spec.gap_width) continue;
    for (int x = wall_x0; x < wall_x0 + spec.wall_thickness; ++x) {
      tau[static_cast<std::size_t>(y) * w + x] = 0.0;
    }
  }

  const int src_y = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
  const int dst_y = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
  GapCorridor out{GridMap(w, h, std::move(tau)),
                  Cell{spec.endpoint_margin, src_y},
                  Cell{w - 1 - spec.endpoint_margin, dst_y},
                  Cell{wall_x0 + spec.wall_thickness / 2, gap_y0 + spec.gap_width / 2}};
  return out;
}

void write_map(std::ostream& out, const GridMap& map) {
  out << kMapMagic << ' ' << kMapVersion << '\n'
      << "width " << map.width() << '\n'
      << "height " << map.height() << '\n'
      << "regions " << map.region_rows() << ' ' << map.region_cols() << '\n'
      << "tau_min " << format_double(map.tau_min()) << '\n';
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (x) out << ' ';
      out << format_double(map.tau(Cell{x, y}));
    }
    out << '\n';
  }
}

namespace {

template <typename T>
T expect_field(std::istream& in, const std::string& key) {
  std::string got;
  if (!(in >> got)) throw ParseError("map: unexpected end of header, wanted '" + key + "'");
  if (got != key) throw ParseError("map: expected '" + key + "', found '" + got + "'");
  T value{};
  if (!(in >> value)) throw ParseError("map: bad value for '" + key + "'");
  return value;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size()) {
    throw ParseError("map: not a number: '" + token + "'");
  }
  return v;
}

}  // namespace

GridMap read_map(std::istream& in) {
  std::string magic;
  if (!(in >> magic)) throw ParseError("map: empty input");
  if (magic != kMapMagic) throw ParseError("map: bad magic '" + magic + "'");
  int version = 0;
  if (!(in >> version) || version != kMapVersion) throw ParseError("map: unsupported version");
  const int width = expect_field<int>(in, "width");
  const int height = expect_field<int>(in, "height");
  if (width <= 0 || height <= 0) throw ParseError("map: non-positive dimensions");
  std::string key;
  int rows = 0, cols = 0;
  if (!(in >> key) || key != "regions" || !(in >> rows >> cols)) {
    throw ParseError("map: expected 'regions <rows> <cols>'");
  }
  const double tau_min = expect_field<double>(in, "tau_min");

  std::string line;
  std::getline(in, line);  // rest of the header line
  std::vector<double> tau;
  tau.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= height) throw ParseError("map: more rows than height " + std::to_string(height));
    std::istringstream ls(line);
    std::string token;
    int count = 0;
    while (ls >> token) {
      const double v = parse_double(token);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::out_of_range("map: traversability out of [0, 1] at row " + std::to_string(row) +
                                ": " + token);
      }
      tau.push_back(v);
      ++count;
    }
    if (count != width) {
      throw ParseError("map: row " + std::to_string(row) + " has " + std::to_string(count) +
                       " values, expected " + std::to_string(width));
    }
    ++row;
  }
  if (row != height) {
    throw ParseError("map: found " + std::to_string(row) + " rows, expected " + std::to_string(height));
  }
  try {
    return GridMap(width, height, std::move(tau), tau_min, rows, cols);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("map: ") + e.what());
  }
}

void save_map(const std::filesystem::path& path, const GridMap& map) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_map(out, map);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GridMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map: " + path.string());
  return read_map(in);
}

void write_mask_csv(std::ostream& out, const GridMap& map) {
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (x) out << ',';
      out << (map.nontraversable(Cell{x, y}) ? 1 : 0);
    }
    out << '\n';
  }
}

}  // namespace semplan
