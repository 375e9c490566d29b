#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace semplan {

/// Cells with traversability below this are obstacles.
inline constexpr double kDefaultTauMin = 0.05;

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Traversability field over a width x height grid, partitioned into a
/// rows x cols tiling of UAV observation regions. Immutable once built.
class GridMap {
 public:
  GridMap(int width, int height, std::vector<double> tau, double tau_min = kDefaultTauMin,
          int region_rows = 1, int region_cols = 1);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return tau_.size(); }
  double tau_min() const noexcept { return tau_min_; }

  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }
  Cell cell(std::size_t index) const noexcept {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }
  bool contains(Cell c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  double tau(std::size_t index) const { return tau_[index]; }
  double tau(Cell c) const { return tau_[index(c)]; }
  std::span<const double> tau_values() const noexcept { return tau_; }

  bool nontraversable(std::size_t index) const { return tau_[index] < tau_min_; }
  bool nontraversable(Cell c) const { return nontraversable(index(c)); }
  std::size_t obstacle_count() const;

  int region_rows() const noexcept { return region_rows_; }
  int region_cols() const noexcept { return region_cols_; }
  std::size_t region_count() const noexcept {
    return static_cast<std::size_t>(region_rows_) * static_cast<std::size_t>(region_cols_);
  }
  std::uint32_t region_of(std::size_t index) const { return region_[index]; }
  std::uint32_t region_of(Cell c) const { return region_[index(c)]; }

  /// Same field with a new tau vector (regions and threshold kept).
  GridMap with_tau(std::vector<double> tau) const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_;
  int height_;
  double tau_min_;
  int region_rows_;
  int region_cols_;
  std::vector<double> tau_;
  std::vector<std::uint32_t> region_;
};

/// Start offsets of `parts` balanced tiles along an axis of `length` cells.
/// The first length % parts tiles are one cell longer. Size parts + 1.
std::vector<int> balanced_split(int length, int parts);

/// Returns a copy of `map` re-partitioned into a rows x cols rectangular tiling
/// with row-major region indices.
GridMap partition_regions(const GridMap& map, int rows, int cols);

/// Synthetic map: uniform noise, box-blurred `smoothing_passes` times, then the
/// lowest `obstacle_density` fraction of cells become obstacles (tau = 0) and the
/// rest ramp linearly from tau_min up to 1. Pure function of its arguments.
GridMap generate_map(std::uint64_t seed, int width, int height, double obstacle_density,
                     int smoothing_passes);

/// Parameters of the gap-corridor benchmark family: a heterogeneous free field
/// split by a thick vertical wall with a single gap.
struct GapCorridorSpec {
  int width = 64;
  int height = 64;
  int wall_thickness = 6;
  int gap_width = 4;
  double tau_low = 0.35;     // free-space traversability range
  double tau_high = 1.0;
  int smoothing_passes = 3;
  int endpoint_margin = 3;   // distance of source/target from the left/right edges
};

struct GapCorridor {
  GridMap map;
  Cell source;
  Cell target;
  Cell gap;  // centre cell of the gap
};

GapCorridor generate_gap_corridor(std::uint64_t seed, const GapCorridorSpec& spec = {});

/// Text map format:
///   SEMPLAN-MAP 1
///   width <w>
///   height <h>
///   regions <rows> <cols>
///   tau_min <value>
///   <h lines of w tau values, row-major>
void write_map(std::ostream& out, const GridMap& map);
GridMap read_map(std::istream& in);
void save_map(const std::filesystem::path& path, const GridMap& map);
GridMap load_map(const std::filesystem::path& path);

/// Obstacle mask as CSV: one row per map row, 1 = non-traversable.
void write_mask_csv(std::ostream& out, const GridMap& map);

}  // namespace semplan
