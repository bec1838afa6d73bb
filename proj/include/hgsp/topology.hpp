#pragma once

#include <array>
#include <string_view>

#include "hgsp/graph_learning.hpp"

namespace hgsp {

/// The eleven topology metrics of a spatial graph.
///
/// Conventions: self loops only count towards `n_self_loops`. Path metrics
/// use unweighted hop distances and ignore unreachable pairs. Eccentricity,
/// radius and diameter come from the largest connected component (lowest
/// vertex index wins ties). Local efficiency uses hop distances inside the
/// subgraph induced by each vertex's neighbours; vertices with fewer than two
/// neighbours contribute 0.
struct TopologyEmbedding {
  double density = 0.0;
  double local_efficiency = 0.0;
  double n_components = 0.0;
  double largest_component_size = 0.0;
  double avg_degree = 0.0;
  double avg_weight = 0.0;
  double n_self_loops = 0.0;
  double char_path_length = 0.0;
  double mean_eccentricity = 0.0;
  double radius = 0.0;
  double diameter = 0.0;

  static constexpr std::size_t kCount = 11;
  static const std::array<std::string_view, kCount>& names();
  std::array<double, kCount> values() const;

  bool operator==(const TopologyEmbedding&) const = default;
};

/// Parallel over BFS sources. Throws ValueError on asymmetric or negative input.
TopologyEmbedding topology_embedding(const SpatialGraph& g);

/// Single-threaded reference for `topology_embedding`; identical output.
TopologyEmbedding topology_embedding_serial(const SpatialGraph& g);

}  // namespace hgsp
