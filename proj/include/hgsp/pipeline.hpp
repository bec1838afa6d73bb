#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hgsp/config.hpp"
#include "hgsp/gsp.hpp"
#include "hgsp/signal.hpp"
#include "hgsp/topology.hpp"

namespace hgsp {

/// Named features, in extraction order.
///
/// Names follow "L<level>.<raw|b<c>>.<full|w<k>>.<metric>" with 1-based band
/// and window numbers. Order: level 0 topology; level 1 per band (full signal,
/// then each window); level 2 per band (topology, energy1..M, lambda_min,
/// lambda_max, lambda_mean, sgwt.t<j>.low<q> / sgwt.t<j>.high<q>, quadratic_form).
struct FeatureVector {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
};

/// 11 (1 + C (K + 1)) + C (11 + M + 3 + 2 J z + 1).
std::size_t expected_feature_count(std::size_t bands, const PipelineConfig& cfg);

std::vector<std::string> feature_names(std::size_t bands, const PipelineConfig& cfg);

/// Threshold chosen by the config's kappa policy.
double choose_kappa(const Autocovariance& R, const KappaPolicy& policy);

/// learn -> collapse -> threshold -> topology.
TopologyEmbedding topology_of(const Signal& x, Index lag, const PipelineConfig& cfg);

/// Column-major flattening of the signal, matching VertexIndexMap (u = k S + i).
Vector flatten_graph_signal(const Signal& x);

FeatureVector extract_features(const Signal& x, const PipelineConfig& cfg);

struct SampleError {
  std::size_t index;
  std::string message;
};

/// Row i holds sample i's features, or nothing when it failed.
struct BatchResult {
  std::vector<std::string> names;
  std::vector<std::optional<std::vector<double>>> rows;
  std::vector<SampleError> errors;  // ascending by index
};

/// Extracts every sample, parallel over samples. Throws ValueError for
/// inhomogeneous shapes and Error when every sample fails.
BatchResult extract_batch(std::span<const Signal> samples, const PipelineConfig& cfg);

/// Single-threaded reference for `extract_batch`.
BatchResult extract_batch_serial(std::span<const Signal> samples, const PipelineConfig& cfg);

}  // namespace hgsp
