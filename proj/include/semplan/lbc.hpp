#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "semplan/grid_map.hpp"
#include "semplan/planner.hpp"
#include "semplan/rng.hpp"
#include "semplan/trav_graph.hpp"

namespace semplan {

/// Tuning of the Monte-Carlo local betweenness centrality (LBC) allocator.
struct LbcParams {
  std::size_t n_samples = 2000;     // successful sampled paths per call
  double h = 0.05;                  // xi threshold
  double iota = 1e-6;               // keeps 1 / (w + iota) finite
  double varrho = 0.0;              // sigmoid slope; <= 0 means 4 / reference score
  int corridor_radius = 3;          // r_c, cells
  int window_radius = 2;            // r, cells
  std::optional<double> psi_h_scale;  // reference = scale * Psi_h; default 1 / n_regions
  double delta_min = 0.05;
  double delta_max = 0.95;
  bool include_best_path = true;    // count p* vertices once per batch
  std::size_t batch_size = 100;     // successes per RNG substream
  std::size_t max_attempts_factor = 50;  // attempts per batch <= factor * batch target
  std::size_t max_steps = 0;        // 0 means the number of vertices in the window
  std::uint64_t seed = 1;

  /// Settings that follow the allocation rule literally: no p* inclusion and
  /// the sigmoid centred on the full Psi_h.
  static LbcParams strict_literal();
  void validate() const;
};

struct TransitionProb {
  VertexId vertex;
  double probability;
};

/// p(u, v) proportional to 1 / (w(u, v) + iota) over the neighbours v of u with
/// visited[v] == 0. Empty when every neighbour has been visited (dead end).
std::vector<TransitionProb> transition_probs(const TravGraph& graph, VertexId u, std::span<const char> visited,
                                             double iota);

/// Restriction of online sampling: path corridor, frontier of changed costs,
/// and their dilation. All three are sorted vertex lists.
struct UpdateWindow {
  std::vector<VertexId> corridor;
  std::vector<VertexId> frontier;
  std::vector<VertexId> window;
  std::vector<char> member;  // per vertex of the graph
  int corridor_radius = 0;
  int window_radius = 0;

  bool contains(VertexId v) const { return v < member.size() && member[v] != 0; }
  std::size_t size() const noexcept { return window.size(); }
};

/// Window covering every vertex.
UpdateWindow full_window(const TravGraph& graph);

/// C_t = vertices within Chebyshev distance r_c of `best`; F_t = vertices whose
/// cost differs between the epochs; W_t = vertices within distance r of C_t u F_t.
UpdateWindow compute_window(const TravGraph& graph_t, const TravGraph& graph_prev, const Path& best,
                            int corridor_radius, int window_radius);

/// Self-avoiding weighted random walk from source following transition_probs.
/// Returns nullopt on a dead end or after max_steps moves without reaching the
/// target. When `window` is given the walk never leaves it.
std::optional<Path> sample_path(const TravGraph& graph, VertexId source, VertexId target, double iota, Rng& rng,
                                std::size_t max_steps, const UpdateWindow* window = nullptr);
std::optional<Path> sample_path(const TravGraph& graph, VertexId source, VertexId target, double iota,
                                std::uint64_t seed, std::size_t max_steps, const UpdateWindow* window = nullptr);

/// Candidate set for Q on graphs too large to enumerate: the k lowest-weight
/// distinct paths among `attempts` sampled walks, the optimum itself excluded.
/// Sorted by weight, then lexicographically.
inline constexpr std::size_t kDefaultCandidates = 32;
std::vector<Path> sampled_candidates(const TravGraph& graph, VertexId source, VertexId target, std::size_t attempts,
                                     std::uint64_t seed, std::size_t k = kDefaultCandidates, double iota = 1e-6);

struct SamplingStats {
  std::size_t attempts = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;
  std::size_t qualifying = 0;  // sampled candidates with xi >= h
  std::size_t batches = 0;

  double failure_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(attempts);
  }
  SamplingStats& operator+=(const SamplingStats& o);
};

/// Per-vertex counts from one LBC computation, plus their total (the Psi_h
/// contribution).
struct LbcCounts {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
  SamplingStats stats;

  LbcCounts& operator+=(const LbcCounts& o);
};

/// Number of RNG batches compute_lbc splits n_samples into.
std::size_t lbc_batch_count(const LbcParams& params);

/// One batch of compute_lbc. `best` must be the Dijkstra path on `graph`.
LbcCounts compute_lbc_batch(const TravGraph& graph, VertexId source, VertexId target, const Path& best,
                            const VarianceField& field, const LbcParams& params, std::size_t batch,
                            const UpdateWindow* window = nullptr);

/// Monte-Carlo LBC: sampled paths whose xi against the current best path is at
/// least h add one to each of their vertices. Batches run on independent
/// substreams of params.seed and merge by addition, so the result does not
/// depend on `workers`.
LbcCounts compute_lbc(const TravGraph& graph, VertexId source, VertexId target, const VarianceField& field,
                      const LbcParams& params, const UpdateWindow* window = nullptr, std::size_t workers = 1);

/// Sum of per-vertex scores inside each region of `map`.
std::vector<std::uint64_t> region_scores(std::span<const std::uint64_t> psi, const TravGraph& graph,
                                         const GridMap& map);

/// 1 / (1 + exp(varrho (psi_h - psi_k))), clamped to [delta_min, delta_max].
double delta_allocation(double psi_k, double psi_h, double varrho, double delta_min = 0.05,
                        double delta_max = 0.95);

struct LbcState {
  double h = 0.0;
  std::vector<std::uint64_t> psi_off;
  std::vector<std::uint64_t> psi_on;
  std::vector<std::uint64_t> psi_working;
  std::uint64_t psi_h = 0;         // sum of working counts
  double reference = 0.0;          // psi_h_scale * psi_h, the sigmoid centre
  double varrho = 0.0;             // slope actually used
  std::vector<std::uint64_t> region_scores;
  std::vector<double> delta;
};

/// Working counts, region scores and per-region delta from offline and online counts.
LbcState finalize_state(std::vector<std::uint64_t> psi_off, std::vector<std::uint64_t> psi_on,
                        const TravGraph& graph, const GridMap& map, const LbcParams& params);

struct AllocationResult {
  LbcState state;
  UpdateWindow window;
  Path best;
  SamplingStats stats;
};

/// One decision epoch: best path on graph_t, update window against graph_prev,
/// windowed LBC increment on top of psi_off, then region scores and delta.
AllocationResult allocate(const TravGraph& graph_t, const TravGraph& graph_prev, const GridMap& map,
                          VertexId source, VertexId target, const VarianceField& field, const LbcParams& params,
                          std::span<const std::uint64_t> psi_off, std::size_t workers = 1);

/// Offline precomputation: full-map LBC counts on a prior snapshot.
LbcCounts lbc_offline(const TravGraph& graph, VertexId source, VertexId target, const VarianceField& field,
                      const LbcParams& params, std::size_t workers = 1);

/// Text state file:
///   SEMPLAN-LBC 1
///   vertices <n>
///   h <h>
///   <n lines: vertex x y psi_off psi_on>
void write_lbc_state(std::ostream& out, const LbcState& state, const TravGraph& graph);

struct StoredLbc {
  double h = 0.0;
  std::vector<std::uint64_t> psi_off;
  std::vector<std::uint64_t> psi_on;
};
StoredLbc read_lbc_state(std::istream& in, const TravGraph& graph);
void save_lbc_state(const std::filesystem::path& path, const LbcState& state, const TravGraph& graph);
StoredLbc load_lbc_state(const std::filesystem::path& path, const TravGraph& graph);

/// "region,score,delta".
void write_region_csv(std::ostream& out, const LbcState& state);

}  // namespace semplan
