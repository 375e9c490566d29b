#include "semplan/lbc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "semplan/error.hpp"
#include "semplan/format.hpp"
#include "semplan/parallel.hpp"
#include "semplan/robustness.hpp"

namespace semplan {

LbcParams LbcParams::strict_literal() {
  LbcParams p;
  p.include_best_path = false;
  p.psi_h_scale = 1.0;
  return p;
}

void LbcParams::validate() const {
  if (n_samples == 0) throw std::invalid_argument("n_samples must be >= 1");
  if (!(h >= 0.0)) throw std::invalid_argument("xi threshold must be non-negative");
  if (!(iota > 0.0)) throw std::invalid_argument("iota must be positive");
  if (corridor_radius < 0 || window_radius < 0) throw std::invalid_argument("radii must be non-negative");
  if (psi_h_scale && !(*psi_h_scale > 0.0)) throw std::invalid_argument("psi_h_scale must be positive");
  if (!(delta_min > 0.0 && delta_min <= delta_max && delta_max <= 1.0)) {
    throw std::invalid_argument("need 0 < delta_min <= delta_max <= 1");
  }
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (max_attempts_factor == 0) throw std::invalid_argument("max_attempts_factor must be >= 1");
}

std::vector<TransitionProb> transition_probs(const TravGraph& graph, VertexId u, std::span<const char> visited,
                                             double iota) {
  if (!(iota > 0.0)) throw std::invalid_argument("iota must be positive");
  if (visited.size() != graph.vertex_count()) throw std::invalid_argument("visited mask size mismatch");
  std::vector<TransitionProb> out;
  double total = 0.0;
  for (VertexId v : graph.neighbors(u)) {
    if (visited[v]) continue;
    const double inv = 1.0 / (graph.cost(u) + graph.cost(v) + iota);
    out.push_back({v, inv});
    total += inv;
  }
  for (auto& t : out) t.probability /= total;
  return out;
}

UpdateWindow full_window(const TravGraph& graph) {
  UpdateWindow w;
  w.window.resize(graph.vertex_count());
  std::iota(w.window.begin(), w.window.end(), VertexId{0});
  w.corridor = w.window;
  w.member.assign(graph.vertex_count(), 1);
  return w;
}

namespace {

// In-place Chebyshev dilation of a row-major mask by `r` cells.
void dilate(std::vector<char>& mask, int width, int height, int r) {
  if (r <= 0) return;
  std::vector<char> tmp(mask.size(), 0);
  for (int y = 0; y < height; ++y) {
    int last = -1 - r;  // most recent set column
    for (int x = 0; x < width + r; ++x) {
      if (x < width && mask[static_cast<std::size_t>(y) * width + x]) last = x;
      const int target = x - r;
      if (target >= 0 && target < width) {
        // any set cell in [target - r, target + r]
        tmp[static_cast<std::size_t>(y) * width + target] = (last >= target - r) ? 1 : 0;
      }
    }
  }
  for (int x = 0; x < width; ++x) {
    int last = -1 - r;
    for (int y = 0; y < height + r; ++y) {
      if (y < height && tmp[static_cast<std::size_t>(y) * width + x]) last = y;
      const int target = y - r;
      if (target >= 0 && target < height) {
        mask[static_cast<std::size_t>(target) * width + x] = (last >= target - r) ? 1 : 0;
      }
    }
  }
}

std::vector<VertexId> vertices_in(const std::vector<char>& mask, const TravGraph& graph) {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    if (mask[graph.cell_index(v)]) out.push_back(v);
  }
  return out;
}

}  // namespace

UpdateWindow compute_window(const TravGraph& graph_t, const TravGraph& graph_prev, const Path& best,
                            int corridor_radius, int window_radius) {
  if (!graph_t.same_topology(graph_prev)) throw std::invalid_argument("window: graphs differ in topology");
  if (corridor_radius < 0 || window_radius < 0) throw std::invalid_argument("window: negative radius");
  const int w = graph_t.width(), h = graph_t.height();
  const std::size_t cells = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

  UpdateWindow out;
  out.corridor_radius = corridor_radius;
  out.window_radius = window_radius;

  std::vector<char> corridor(cells, 0);
  for (VertexId v : best.vertices) {
    if (v >= graph_t.vertex_count()) throw std::out_of_range("window: path vertex out of range");
    corridor[graph_t.cell_index(v)] = 1;
  }
  dilate(corridor, w, h, corridor_radius);
  out.corridor = vertices_in(corridor, graph_t);

  std::vector<char> seeds(cells, 0);
  for (VertexId v : out.corridor) seeds[graph_t.cell_index(v)] = 1;
  for (VertexId v = 0; v < graph_t.vertex_count(); ++v) {
    if (graph_t.cost(v) != graph_prev.cost(v)) {
      out.frontier.push_back(v);
      seeds[graph_t.cell_index(v)] = 1;
    }
  }
  dilate(seeds, w, h, window_radius);
  out.window = vertices_in(seeds, graph_t);
  out.member.assign(graph_t.vertex_count(), 0);
  for (VertexId v : out.window) out.member[v] = 1;
  return out;
}

namespace {

// Reusable walk state: visit stamps avoid clearing a mask per attempt.
class Walker {
 public:
  explicit Walker(std::size_t n) : stamp_(n, 0) {}

  std::optional<Path> walk(const TravGraph& graph, VertexId source, VertexId target, double iota, Rng& rng,
                           std::size_t max_steps, const UpdateWindow* window) {
    ++epoch_;
    Path path;
    path.vertices.push_back(source);
    stamp_[source] = epoch_;
    double weight = graph.cost(source);
    VertexId u = source;
    std::array<VertexId, 8> cand{};
    std::array<double, 8> inv{};
    for (std::size_t step = 0; u != target; ++step) {
      if (step >= max_steps) return std::nullopt;
      std::size_t k = 0;
      double total = 0.0;
      for (VertexId v : graph.neighbors(u)) {
        if (stamp_[v] == epoch_) continue;
        if (window != nullptr && !window->contains(v)) continue;
        cand[k] = v;
        inv[k] = 1.0 / (graph.cost(u) + graph.cost(v) + iota);
        total += inv[k];
        ++k;
      }
      if (k == 0) return std::nullopt;
      const double pick = rng.uniform() * total;
      double acc = 0.0;
      std::size_t chosen = k - 1;
      for (std::size_t i = 0; i < k; ++i) {
        acc += inv[i];
        if (pick < acc) {
          chosen = i;
          break;
        }
      }
      u = cand[chosen];
      stamp_[u] = epoch_;
      path.vertices.push_back(u);
      weight += graph.cost(u);
    }
    path.total_weight = weight;
    return path;
  }

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

void check_endpoints(const TravGraph& graph, VertexId source, VertexId target, const UpdateWindow* window) {
  if (source >= graph.vertex_count() || target >= graph.vertex_count()) {
    throw std::out_of_range("endpoint out of range");
  }
  if (window != nullptr) {
    if (window->member.size() != graph.vertex_count()) throw std::invalid_argument("window built for another graph");
    if (!window->contains(source) || !window->contains(target)) {
      throw std::invalid_argument("source or target lies outside the update window");
    }
  }
}

}  // namespace

std::optional<Path> sample_path(const TravGraph& graph, VertexId source, VertexId target, double iota, Rng& rng,
                                std::size_t max_steps, const UpdateWindow* window) {
  check_endpoints(graph, source, target, window);
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
  Walker walker(graph.vertex_count());
  return walker.walk(graph, source, target, iota, rng, max_steps, window);
}

std::optional<Path> sample_path(const TravGraph& graph, VertexId source, VertexId target, double iota,
                                std::uint64_t seed, std::size_t max_steps, const UpdateWindow* window) {
  Rng rng(seed, Stream::kSampler);
  return sample_path(graph, source, target, iota, rng, max_steps, window);
}

std::vector<Path> sampled_candidates(const TravGraph& graph, VertexId source, VertexId target, std::size_t attempts,
                                     std::uint64_t seed, std::size_t k, double iota) {
  const Path best = dijkstra(graph, source, target);
  Rng rng(seed, Stream::kSampler);
  Walker walker(graph.vertex_count());
  std::vector<Path> found;
  for (std::size_t a = 0; a < attempts; ++a) {
    auto p = walker.walk(graph, source, target, iota, rng, graph.vertex_count(), nullptr);
    if (p && p->vertices != best.vertices) found.push_back(std::move(*p));
  }
  std::sort(found.begin(), found.end(), [](const Path& a, const Path& b) {
    if (a.total_weight != b.total_weight) return a.total_weight < b.total_weight;
    return a.vertices < b.vertices;
  });
  found.erase(std::unique(found.begin(), found.end(),
                          [](const Path& a, const Path& b) { return a.vertices == b.vertices; }),
              found.end());
  if (found.size() > k) found.resize(k);
  return found;
}

SamplingStats& SamplingStats::operator+=(const SamplingStats& o) {
  attempts += o.attempts;
  successes += o.successes;
  failures += o.failures;
  qualifying += o.qualifying;
  batches += o.batches;
  return *this;
}

LbcCounts& LbcCounts::operator+=(const LbcCounts& o) {
  if (counts.empty()) counts.assign(o.counts.size(), 0);
  if (counts.size() != o.counts.size()) throw std::invalid_argument("LBC count size mismatch");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  total += o.total;
  stats += o.stats;
  return *this;
}

std::size_t lbc_batch_count(const LbcParams& params) {
  return (params.n_samples + params.batch_size - 1) / params.batch_size;
}

LbcCounts compute_lbc_batch(const TravGraph& graph, VertexId source, VertexId target, const Path& best,
                            const VarianceField& field, const LbcParams& params, std::size_t batch,
                            const UpdateWindow* window) {
  params.validate();
  check_endpoints(graph, source, target, window);
  if (field.size() != graph.vertex_count()) throw std::invalid_argument("variance field does not cover the graph");
  const std::size_t batches = lbc_batch_count(params);
  if (batch >= batches) throw std::out_of_range("batch index out of range");

  const std::size_t wanted = std::min(params.batch_size, params.n_samples - batch * params.batch_size);
  const std::size_t max_attempts = wanted * params.max_attempts_factor;
  const std::size_t max_steps =
      params.max_steps > 0 ? params.max_steps : (window ? window->size() : graph.vertex_count());

  LbcCounts out;
  out.counts.assign(graph.vertex_count(), 0);
  out.stats.batches = 1;

  const double var_star = path_variance(field, best);
  const double w_star = best.total_weight;

  if (params.include_best_path) {
    for (VertexId v : best.vertices) {
      if (window == nullptr || window->contains(v)) {
        ++out.counts[v];
        ++out.total;
      }
    }
  }

  Rng rng(derive_seed(derive_seed(params.seed, Stream::kSampler), batch));
  Walker walker(graph.vertex_count());
  while (out.stats.successes < wanted && out.stats.attempts < max_attempts) {
    ++out.stats.attempts;
    auto sampled = walker.walk(graph, source, target, params.iota, rng, max_steps, window);
    if (!sampled) {
      ++out.stats.failures;
      continue;
    }
    ++out.stats.successes;
    if (sampled->vertices == best.vertices) continue;  // p* is not its own competitor
    const double delta_w = std::max(0.0, sampled->total_weight - w_star);
    const double xi = sensitivity_xi(delta_w, var_star, path_variance(field, *sampled));
    if (xi < params.h) continue;
    ++out.stats.qualifying;
    for (VertexId v : sampled->vertices) ++out.counts[v];
    out.total += sampled->vertices.size();
  }
  return out;
}

LbcCounts compute_lbc(const TravGraph& graph, VertexId source, VertexId target, const VarianceField& field,
                      const LbcParams& params, const UpdateWindow* window, std::size_t workers) {
  params.validate();
  check_endpoints(graph, source, target, window);
  const Path best = dijkstra(graph, source, target);
  const std::size_t batches = lbc_batch_count(params);
  std::vector<LbcCounts> parts(batches);
  parallel_for(batches, workers, [&](std::size_t b) {
    parts[b] = compute_lbc_batch(graph, source, target, best, field, params, b, window);
  });
  LbcCounts out;
  out.counts.assign(graph.vertex_count(), 0);
  for (const auto& p : parts) out += p;
  return out;
}

std::vector<std::uint64_t> region_scores(std::span<const std::uint64_t> psi, const TravGraph& graph,
                                         const GridMap& map) {
  if (psi.size() != graph.vertex_count()) throw std::invalid_argument("LBC state does not cover the graph");
  if (graph.width() != map.width() || graph.height() != map.height()) {
    throw std::invalid_argument("graph and map dimensions differ");
  }
  std::vector<std::uint64_t> scores(map.region_count(), 0);
  for (VertexId v = 0; v < psi.size(); ++v) {
    const auto k = map.region_of(graph.cell_index(v));
    if (k >= scores.size()) throw std::out_of_range("region index out of range");
    scores[k] += psi[v];
  }
  return scores;
}

double delta_allocation(double psi_k, double psi_h, double varrho, double delta_min, double delta_max) {
  const double d = 1.0 / (1.0 + std::exp(varrho * (psi_h - psi_k)));
  return std::clamp(d, delta_min, delta_max);
}

LbcState finalize_state(std::vector<std::uint64_t> psi_off, std::vector<std::uint64_t> psi_on,
                        const TravGraph& graph, const GridMap& map, const LbcParams& params) {
  params.validate();
  if (psi_off.empty()) psi_off.assign(graph.vertex_count(), 0);
  if (psi_on.empty()) psi_on.assign(graph.vertex_count(), 0);
  if (psi_off.size() != graph.vertex_count() || psi_on.size() != graph.vertex_count()) {
    throw std::invalid_argument("LBC counts do not cover the graph");
  }
  LbcState s;
  s.h = params.h;
  s.psi_working.resize(psi_off.size());
  for (std::size_t i = 0; i < psi_off.size(); ++i) s.psi_working[i] = psi_off[i] + psi_on[i];
  s.psi_off = std::move(psi_off);
  s.psi_on = std::move(psi_on);
  s.psi_h = std::accumulate(s.psi_working.begin(), s.psi_working.end(), std::uint64_t{0});
  s.region_scores = region_scores(s.psi_working, graph, map);
  const double scale = params.psi_h_scale.value_or(1.0 / static_cast<double>(map.region_count()));
  s.reference = scale * static_cast<double>(s.psi_h);
  s.varrho = params.varrho > 0.0 ? params.varrho : (s.reference > 0.0 ? 4.0 / s.reference : 0.0);
  s.delta.resize(s.region_scores.size());
  for (std::size_t k = 0; k < s.delta.size(); ++k) {
    s.delta[k] = delta_allocation(static_cast<double>(s.region_scores[k]), s.reference, s.varrho, params.delta_min,
                                  params.delta_max);
  }
  return s;
}

AllocationResult allocate(const TravGraph& graph_t, const TravGraph& graph_prev, const GridMap& map,
                          VertexId source, VertexId target, const VarianceField& field, const LbcParams& params,
                          std::span<const std::uint64_t> psi_off, std::size_t workers) {
  params.validate();
  AllocationResult out;
  out.best = dijkstra(graph_t, source, target);
  out.window = compute_window(graph_t, graph_prev, out.best, params.corridor_radius, params.window_radius);
  LbcCounts online = compute_lbc(graph_t, source, target, field, params, &out.window, workers);
  out.stats = online.stats;
  out.state = finalize_state(std::vector<std::uint64_t>(psi_off.begin(), psi_off.end()), std::move(online.counts),
                             graph_t, map, params);
  return out;
}

LbcCounts lbc_offline(const TravGraph& graph, VertexId source, VertexId target, const VarianceField& field,
                      const LbcParams& params, std::size_t workers) {
  return compute_lbc(graph, source, target, field, params, nullptr, workers);
}

namespace {
constexpr const char* kLbcMagic = "SEMPLAN-LBC";
constexpr int kLbcVersion = 1;
}  // namespace

void write_lbc_state(std::ostream& out, const LbcState& state, const TravGraph& graph) {
  if (state.psi_off.size() != graph.vertex_count() || state.psi_on.size() != graph.vertex_count()) {
    throw std::invalid_argument("LBC state does not match graph");
  }
  out << kLbcMagic << ' ' << kLbcVersion << '\n'
      << "vertices " << graph.vertex_count() << '\n'
      << "h " << format_double(state.h) << '\n';
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    const Cell c = graph.cell(v);
    out << v << ' ' << c.x << ' ' << c.y << ' ' << state.psi_off[v] << ' ' << state.psi_on[v] << '\n';
  }
}

StoredLbc read_lbc_state(std::istream& in, const TravGraph& graph) {
  std::string magic, key;
  int version = 0;
  if (!(in >> magic)) throw ParseError("lbc: empty input");
  if (magic != kLbcMagic || !(in >> version) || version != kLbcVersion) throw ParseError("lbc: bad header");
  std::size_t n = 0;
  if (!(in >> key >> n) || key != "vertices") throw ParseError("lbc: expected 'vertices <n>'");
  if (n != graph.vertex_count()) throw ParseError("lbc: vertex count does not match the graph");
  StoredLbc s;
  if (!(in >> key >> s.h) || key != "h") throw ParseError("lbc: expected 'h <value>'");
  s.psi_off.resize(n);
  s.psi_on.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = 0;
    Cell c;
    if (!(in >> v >> c.x >> c.y >> s.psi_off[i] >> s.psi_on[i])) {
      throw ParseError("lbc: truncated at vertex " + std::to_string(i));
    }
    if (v != i || !(graph.cell(static_cast<VertexId>(i)) == c)) {
      throw ParseError("lbc: vertex " + std::to_string(i) + " does not match the graph");
    }
  }
  return s;
}

void save_lbc_state(const std::filesystem::path& path, const LbcState& state, const TravGraph& graph) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_lbc_state(out, state, graph);
}

StoredLbc load_lbc_state(const std::filesystem::path& path, const TravGraph& graph) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open LBC state: " + path.string());
  return read_lbc_state(in, graph);
}

void write_region_csv(std::ostream& out, const LbcState& state) {
  out << "region,score,delta\n";
  for (std::size_t k = 0; k < state.delta.size(); ++k) {
    out << k << ',' << state.region_scores[k] << ',' << format_double(state.delta[k]) << '\n';
  }
}

}  // namespace semplan
