#include "hgsp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "hgsp/errors.hpp"

namespace hgsp {

const std::array<std::string_view, TopologyEmbedding::kCount>& TopologyEmbedding::names() {
  static const std::array<std::string_view, kCount> n{
      "density",          "local_efficiency", "n_components",      "largest_component_size",
      "avg_degree",       "avg_weight",       "n_self_loops",      "char_path_length",
      "mean_eccentricity", "radius",          "diameter"};
  return n;
}

std::array<double, TopologyEmbedding::kCount> TopologyEmbedding::values() const {
  return {density,      local_efficiency, n_components,     largest_component_size,
          avg_degree,   avg_weight,       n_self_loops,     char_path_length,
          mean_eccentricity, radius,      diameter};
}

namespace {

using Adjacency = std::vector<std::vector<int>>;
constexpr int kUnreachable = -1;

void validate(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw ValueError(std::string(what) + " must be square");
  if (!m.allFinite()) throw ValueError(std::string(what) + " has non-finite entries");
  if ((m.array() < 0.0).any()) throw ValueError(std::string(what) + " has negative entries");
  if (m != m.transpose()) throw ValueError(std::string(what) + " is not symmetric");
}

// BFS hop distances from `source`, restricted to vertices with allowed[v].
std::vector<int> bfs(const Adjacency& adj, int source, const std::vector<char>* allowed = nullptr) {
  std::vector<int> dist(adj.size(), kUnreachable);
  std::queue<int> frontier;
  dist[source] = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (dist[v] != kUnreachable || (allowed && !(*allowed)[v])) continue;
      dist[v] = dist[u] + 1;
      frontier.push(v);
    }
  }
  return dist;
}

// Mean inverse distance over unordered neighbour pairs of v, inside the
// subgraph induced by v's neighbourhood.
double vertex_efficiency(const Adjacency& adj, int v) {
  const auto& nbrs = adj[v];
  if (nbrs.size() < 2) return 0.0;
  std::vector<char> allowed(adj.size(), 0);
  for (int a : nbrs) allowed[a] = 1;
  double sum = 0.0;
  for (std::size_t x = 0; x < nbrs.size(); ++x) {
    const auto dist = bfs(adj, nbrs[x], &allowed);
    for (std::size_t y = x + 1; y < nbrs.size(); ++y) {
      const int d = dist[nbrs[y]];
      if (d > 0) sum += 1.0 / d;
    }
  }
  const double pairs = 0.5 * static_cast<double>(nbrs.size()) * static_cast<double>(nbrs.size() - 1);
  return sum / pairs;
}

template <bool Parallel>
TopologyEmbedding embed(const SpatialGraph& g) {
  validate(g.adjacency, "adjacency");
  if (g.weights) {
    validate(*g.weights, "weights");
    if (g.weights->rows() != g.adjacency.rows()) throw ValueError("weights and adjacency differ in size");
  }
  const int S = static_cast<int>(g.size());
  TopologyEmbedding t;
  if (S == 0) return t;

  Adjacency adj(S);
  std::size_t edges = 0;
  for (int i = 0; i < S; ++i) {
    if (g.adjacency(i, i) != 0.0) t.n_self_loops += 1.0;
    for (int j = 0; j < S; ++j) {
      if (i != j && g.adjacency(i, j) != 0.0) adj[i].push_back(j);
    }
    edges += adj[i].size();
  }
  edges /= 2;

  const double offdiag_pairs = 0.5 * S * (S - 1.0);
  t.density = S > 1 ? static_cast<double>(edges) / offdiag_pairs : 0.0;
  t.avg_degree = 2.0 * static_cast<double>(edges) / S;

  const Matrix& w = g.weights ? *g.weights : g.adjacency;
  if (S > 1) t.avg_weight = (w.sum() - w.trace()) / (S * (S - 1.0));

  // All-pairs hop distances; rows are independent.
  std::vector<std::vector<int>> dist(S);
  std::vector<double> efficiency(S, 0.0);
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (int s = 0; s < S; ++s) {
    dist[s] = bfs(adj, s);
    efficiency[s] = vertex_efficiency(adj, s);
  }
  t.local_efficiency = std::accumulate(efficiency.begin(), efficiency.end(), 0.0) / S;

  // Components: label each vertex by the lowest vertex it reaches.
  std::vector<int> component(S, -1);
  std::vector<int> roots;
  for (int s = 0; s < S; ++s) {
    if (component[s] != -1) continue;
    roots.push_back(s);
    for (int v = 0; v < S; ++v) {
      if (dist[s][v] != kUnreachable) component[v] = s;
    }
  }
  t.n_components = static_cast<double>(roots.size());
  int largest_root = roots.front();
  int largest_size = 0;
  for (int r : roots) {
    const int size = static_cast<int>(std::count(component.begin(), component.end(), r));
    if (size > largest_size) {
      largest_size = size;
      largest_root = r;
    }
  }
  t.largest_component_size = largest_size;

  double path_sum = 0.0;
  double path_pairs = 0.0;
  for (int u = 0; u < S; ++u) {
    for (int v = 0; v < S; ++v) {
      if (u != v && dist[u][v] != kUnreachable) {
        path_sum += dist[u][v];
        path_pairs += 1.0;
      }
    }
  }
  t.char_path_length = path_pairs > 0 ? path_sum / path_pairs : 0.0;

  double ecc_sum = 0.0;
  int radius = -1;
  int diameter = 0;
  for (int u = 0; u < S; ++u) {
    if (component[u] != largest_root) continue;
    const int ecc = *std::max_element(dist[u].begin(), dist[u].end());
    ecc_sum += ecc;
    radius = radius < 0 ? ecc : std::min(radius, ecc);
    diameter = std::max(diameter, ecc);
  }
  t.mean_eccentricity = ecc_sum / largest_size;
  t.radius = radius;
  t.diameter = diameter;
  return t;
}

}  // namespace

TopologyEmbedding topology_embedding(const SpatialGraph& g) { return embed<true>(g); }

TopologyEmbedding topology_embedding_serial(const SpatialGraph& g) { return embed<false>(g); }

}  // namespace hgsp
