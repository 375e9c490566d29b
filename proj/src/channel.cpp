#include "semplan/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "semplan/error.hpp"
#include "semplan/rng.hpp"

namespace semplan {

namespace {

void check_delta(std::span<const double> delta, std::size_t regions) {
  if (delta.size() != regions) {
    throw std::invalid_argument("delta has " + std::to_string(delta.size()) + " entries for " +
                                std::to_string(regions) + " regions");
  }
  for (double d : delta) {
    if (!(d > 0.0 && d <= 1.0)) throw std::out_of_range("delta must lie in (0, 1]");
  }
}

// Index of the cell below x on a sorted axis and the interpolation weight.
std::pair<std::size_t, double> bracket(const std::vector<double>& axis, double x) {
  if (axis.size() == 1 || x <= axis.front()) return {0, 0.0};
  if (x >= axis.back()) return {axis.size() - 2, 1.0};
  const auto hi = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), x) - axis.begin());
  const std::size_t lo = hi - 1;
  return {lo, (x - axis[lo]) / (axis[hi] - axis[lo])};
}

}  // namespace

CalibrationTable::CalibrationTable(std::vector<double> deltas, std::vector<double> snrs_db,
                                   std::vector<double> values)
    : deltas_(std::move(deltas)), snrs_(std::move(snrs_db)), values_(std::move(values)) {
  if (deltas_.empty() || snrs_.empty()) throw std::invalid_argument("calibration grid is empty");
  if (values_.size() != deltas_.size() * snrs_.size()) throw std::invalid_argument("calibration grid incomplete");
  if (!std::is_sorted(deltas_.begin(), deltas_.end()) || !std::is_sorted(snrs_.begin(), snrs_.end()) ||
      std::adjacent_find(deltas_.begin(), deltas_.end()) != deltas_.end() ||
      std::adjacent_find(snrs_.begin(), snrs_.end()) != snrs_.end()) {
    throw std::invalid_argument("calibration axes must be strictly increasing");
  }
  for (double v : values_) {
    if (!(v >= 0.0)) throw std::invalid_argument("calibration variance must be non-negative");
  }
}

CalibrationTable CalibrationTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("calibration: empty input");
  if (line.find("delta") == std::string::npos) throw ParseError("calibration: missing header");
  std::map<std::pair<double, double>, double> cells;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double d = 0, s = 0, v = 0;
    char c1 = 0, c2 = 0;
    if (!(ls >> d >> c1 >> s >> c2 >> v) || c1 != ',' || c2 != ',') {
      throw ParseError("calibration: malformed row " + std::to_string(lineno));
    }
    if (!cells.emplace(std::make_pair(d, s), v).second) {
      throw ParseError("calibration: duplicate entry on row " + std::to_string(lineno));
    }
  }
  std::vector<double> deltas, snrs;
  for (const auto& [key, v] : cells) {
    deltas.push_back(key.first);
    snrs.push_back(key.second);
  }
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());
  std::vector<double> values;
  values.reserve(deltas.size() * snrs.size());
  for (double d : deltas) {
    for (double s : snrs) {
      const auto it = cells.find({d, s});
      if (it == cells.end()) throw ParseError("calibration: grid is not rectangular");
      values.push_back(it->second);
    }
  }
  try {
    return CalibrationTable(std::move(deltas), std::move(snrs), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("calibration: ") + e.what());
  }
}

CalibrationTable CalibrationTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration table: " + path.string());
  return read_csv(in);
}

double CalibrationTable::lookup(double delta, double snr_db) const {
  const auto [i, a] = bracket(deltas_, delta);
  const auto [j, b] = bracket(snrs_, snr_db);
  const std::size_t ns = snrs_.size();
  auto at = [&](std::size_t di, std::size_t sj) {
    return values_[std::min(di, deltas_.size() - 1) * ns + std::min(sj, ns - 1)];
  };
  const double v00 = at(i, j), v01 = at(i, j + 1), v10 = at(i + 1, j), v11 = at(i + 1, j + 1);
  return (1 - a) * ((1 - b) * v00 + b * v01) + a * ((1 - b) * v10 + b * v11);
}

void ChannelProfile::validate() const {
  if (!(sigma0_sq >= 0.0)) throw std::invalid_argument("sigma0_sq must be non-negative");
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  if (!(gamma_floor > 0.0)) throw std::invalid_argument("gamma_floor must be positive");
}

double nominal_tau_variance(const ChannelProfile& profile, double delta, double snr_db) {
  if (!(delta > 0.0 && delta <= 1.0)) throw std::out_of_range("delta must lie in (0, 1]");
  if (profile.calibration) return profile.calibration->lookup(delta, snr_db);
  return profile.sigma0_sq * (1.0 + profile.beta * (1.0 - delta)) * std::pow(10.0, -snr_db / 10.0);
}

std::vector<double> fading_gains(const ChannelProfile& profile, std::size_t regions, std::uint64_t seed) {
  std::vector<double> g(regions, 1.0);
  if (profile.kind == ChannelKind::kRayleigh) {
    Rng rng(seed, Stream::kFading);
    for (double& gk : g) gk = 1.0 / std::max(rng.exponential(), profile.gamma_floor);
  }
  return g;
}

std::vector<double> tau_variance_per_cell(const GridMap& map, std::span<const double> delta, double snr_db,
                                          const ChannelProfile& profile, std::uint64_t seed) {
  profile.validate();
  check_delta(delta, map.region_count());
  const auto gains = fading_gains(profile, map.region_count(), seed);
  std::vector<double> region_var(map.region_count());
  for (std::size_t k = 0; k < region_var.size(); ++k) {
    region_var[k] = nominal_tau_variance(profile, delta[k], snr_db) * gains[k];
  }
  std::vector<double> out(map.cell_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = region_var[map.region_of(i)];
  return out;
}

VarianceField variance_field(const GridMap& map, const TravGraph& graph, std::span<const double> delta,
                             double snr_db, const ChannelProfile& profile, std::uint64_t seed) {
  const auto per_cell = tau_variance_per_cell(map, delta, snr_db, profile, seed);
  std::vector<double> var_tau(graph.vertex_count());
  for (VertexId v = 0; v < var_tau.size(); ++v) var_tau[v] = per_cell[graph.cell_index(v)];
  return VarianceField::from_tau(graph, std::move(var_tau));
}

GridMap transmit_map(const GridMap& map, std::span<const double> delta, double snr_db,
                     const ChannelProfile& profile, std::uint64_t seed) {
  const auto var = tau_variance_per_cell(map, delta, snr_db, profile, seed);
  Rng rng(seed, Stream::kNoise);
  std::vector<double> tau(map.cell_count());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double z = rng.normal();
    tau[i] = std::clamp(map.tau(i) + std::sqrt(var[i]) * z, 0.0, 1.0);
  }
  return map.with_tau(std::move(tau));
}

const char* to_string(ChannelKind kind) {
  return kind == ChannelKind::kAwgn ? "awgn" : "rayleigh";
}

ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "awgn") return ChannelKind::kAwgn;
  if (s == "rayleigh") return ChannelKind::kRayleigh;
  throw std::invalid_argument("unknown channel kind '" + s + "'");
}

}  // namespace semplan
