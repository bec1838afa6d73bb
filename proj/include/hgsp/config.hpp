#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hgsp/graph_learning.hpp"
#include "hgsp/signal.hpp"

namespace hgsp {

/// How the binarization threshold is chosen for each spatial graph.
struct KappaPolicy {
  enum class Kind { median, fixed };
  Kind kind = Kind::median;
  double value = 0.0;  // used when kind == fixed

  bool operator==(const KappaPolicy&) const = default;
};

/// Parameters of the three-level extractor.
///
/// Text form is one `key = value` per line, `#` starts a comment:
///
///   bands_hz         = 0,7,10,12,18,24,30,100,5000
///   windows          = 4        # K
///   stride           = 0        # 0 means T/K (non-overlapping)
///   level2_samples   = 20       # T2
///   lag0             = 1
///   lag1             = 1
///   lag2             = 10
///   kappa            = median   # or a non-negative number
///   graph_bands      = 4        # M
///   sgwt_scales      = 4        # J
///   z                = 3
///   tensor_cap       = 16777216   # dense tensor slots before coordinate storage
///   level0_entry_cap = 268435456  # refuse level-0 tensors larger than this
///   dense_vertex_cap = 5000       # largest S*T2 for the dense level-2 graph
struct PipelineConfig {
  BandSpec bands_hz = BandSpec::eeg_default();
  Index windows = 4;
  Index stride = 0;
  Index level2_samples = 20;
  Index lag0 = 1;
  Index lag1 = 1;
  Index lag2 = 10;
  KappaPolicy kappa;
  int graph_bands = 4;
  int sgwt_scales = 4;
  int z = 3;
  std::size_t tensor_cap = kDefaultDenseTensorCap;
  std::size_t level0_entry_cap = std::size_t{1} << 28;
  Index dense_vertex_cap = kDefaultDenseVertexCap;

  /// Stride actually used for a signal of `samples` columns.
  Index effective_stride(Index samples) const noexcept {
    return stride > 0 ? stride : samples / windows;
  }

  /// Checks the fields on their own. Throws ConfigError naming the field.
  void validate() const;
  /// Checks the fields against a signal shape. Throws ConfigError naming the field.
  void validate_for(Index channels, Index samples, double sample_rate_hz) const;
};

PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const PipelineConfig& cfg);

}  // namespace hgsp
