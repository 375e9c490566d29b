#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semplan/grid_map.hpp"
#include "semplan/trav_graph.hpp"

namespace semplan {

enum class ChannelKind { kAwgn, kRayleigh };

/// Measured sigma_tau^2 on a rectangular (delta, snr_db) grid. Queries are
/// bilinearly interpolated and clamped to the grid edges.
class CalibrationTable {
 public:
  CalibrationTable(std::vector<double> deltas, std::vector<double> snrs_db, std::vector<double> values);

  /// CSV with header "delta,snr_db,sigma_tau_sq"; rows in any order, but every
  /// (delta, snr) combination of the grid must be present exactly once.
  static CalibrationTable read_csv(std::istream& in);
  static CalibrationTable load(const std::filesystem::path& path);

  double lookup(double delta, double snr_db) const;

 private:
  std::vector<double> deltas_;
  std::vector<double> snrs_;
  std::vector<double> values_;  // [delta index][snr index]
};

/// Abstract transceiver + channel. tau-space variance for a cell in region k:
///   sigma0_sq * (1 + beta * (1 - delta_k)) * 10^(-snr_db / 10) * g_k
/// with g_k = 1 for AWGN and 1 / max(gamma_k, gamma_floor), gamma_k ~ Exp(1)
/// per region, for Rayleigh block fading. A calibration table, when present,
/// replaces the product of the first three factors.
struct ChannelProfile {
  ChannelKind kind = ChannelKind::kAwgn;
  double sigma0_sq = 0.1;
  double beta = 4.0;
  double gamma_floor = 0.05;
  std::optional<CalibrationTable> calibration;

  void validate() const;
};

/// Nominal (fading-free) tau variance for one region.
double nominal_tau_variance(const ChannelProfile& profile, double delta, double snr_db);

/// Per-region fading gains g_k; all ones for AWGN. Deterministic per seed.
std::vector<double> fading_gains(const ChannelProfile& profile, std::size_t regions, std::uint64_t seed);

/// tau-space variance of every map cell.
std::vector<double> tau_variance_per_cell(const GridMap& map, std::span<const double> delta, double snr_db,
                                          const ChannelProfile& profile, std::uint64_t seed);

/// Per-vertex variance field for `graph` (built from `map`): tau variances from
/// the channel and their delta-method cost variances.
VarianceField variance_field(const GridMap& map, const TravGraph& graph, std::span<const double> delta,
                             double snr_db, const ChannelProfile& profile, std::uint64_t seed);

/// Received map: tau_hat = clamp(tau + eps, 0, 1), eps ~ N(0, sigma_tau^2(cell)).
/// One normal is drawn per cell in row-major order regardless of its variance,
/// so two calls with the same seed see the same underlying noise.
GridMap transmit_map(const GridMap& map, std::span<const double> delta, double snr_db,
                     const ChannelProfile& profile, std::uint64_t seed);

const char* to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& s);

}  // namespace semplan
