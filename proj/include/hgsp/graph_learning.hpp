#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "hgsp/signal.hpp"
#include "hgsp/types.hpp"

namespace hgsp {

// All indices are zero-based: channel i, j in [0, S), time k in [0, T), lag l in [0, L].

/// Signal with each column's channel mean removed.
RowMatrix center_spatial(const Signal& x);

/// Signal with each row's time mean removed.
RowMatrix center_temporal(const Signal& x);

/// Flat vertex index u = k * S + i of the spatiotemporal graph (time-major blocks).
struct VertexIndexMap {
  Index channels;
  Index samples;

  Index vertex_count() const noexcept { return channels * samples; }
  Index flat(Index channel, Index time) const noexcept { return time * channels + channel; }
  std::pair<Index, Index> split(Index vertex) const noexcept {
    return {vertex % channels, vertex / channels};
  }
};

/// Non-zero blocks of the spatiotemporal adjacency matrix.
///
/// Lag 0 holds the spatial blocks A_k(i, j); lag l >= 1 holds the temporal
/// blocks B_{k,l}(i, j), the weight between channel i at time k - l and
/// channel j at time k. Entries with k < l do not exist and read as zero.
class WeightTensor {
 public:
  enum class Storage { dense, coordinate };

  struct Entry {
    Index i;
    Index j;
    Index k;
    Index l;
    double value;
  };

  /// `values` laid out as ((l * T + k) * S + i) * S + j.
  static WeightTensor from_dense(Index S, Index T, Index L, std::vector<double> values);
  /// `entries` must be sorted by (l, k, i, j) without duplicates.
  static WeightTensor from_entries(Index S, Index T, Index L, std::vector<Entry> entries);

  Index channels() const noexcept { return S_; }
  Index samples() const noexcept { return T_; }
  Index max_lag() const noexcept { return L_; }
  Storage storage() const noexcept { return storage_; }
  std::size_t stored_entries() const noexcept;

  double at(Index i, Index j, Index k, Index l) const;

  /// Visits stored entries in (l, k, i, j) order, skipping the k < l holes.
  template <class Fn>
  void for_each(Fn&& fn) const {
    if (storage_ == Storage::coordinate) {
      for (const auto& e : entries_) fn(e);
      return;
    }
    for (Index l = 0; l <= L_; ++l) {
      for (Index k = l; k < T_; ++k) {
        for (Index i = 0; i < S_; ++i) {
          for (Index j = 0; j < S_; ++j) fn(Entry{i, j, k, l, dense_[offset(i, j, k, l)]});
        }
      }
    }
  }

  /// One "i,j,k,l,value" line per stored entry, zero-based, after a comment header.
  void write_coordinates(std::ostream& out) const;

 private:
  WeightTensor(Index S, Index T, Index L, Storage storage);
  std::size_t offset(Index i, Index j, Index k, Index l) const noexcept {
    return static_cast<std::size_t>(((l * T_ + k) * S_ + i) * S_ + j);
  }

  Index S_;
  Index T_;
  Index L_;
  Storage storage_;
  std::vector<double> dense_;
  std::vector<Entry> entries_;
};

/// Above this many S^2 T (L+1) slots the tensor switches to coordinate storage.
inline constexpr std::size_t kDefaultDenseTensorCap = std::size_t{1} << 24;

/// Learns |centered product| edge weights for lags 0..max_lag, parallel over time.
WeightTensor learn_weights(const Signal& x, Index max_lag,
                           std::size_t dense_tensor_cap = kDefaultDenseTensorCap);

/// Single-threaded reference for `learn_weights`; identical output.
WeightTensor learn_weights_serial(const Signal& x, Index max_lag,
                                  std::size_t dense_tensor_cap = kDefaultDenseTensorCap);

inline constexpr Index kDefaultDenseVertexCap = 5000;

/// Assembles the symmetric ST x ST block adjacency matrix.
/// Throws SizeError when ST exceeds `vertex_cap`.
Matrix dense_adjacency(const WeightTensor& tau, Index vertex_cap = kDefaultDenseVertexCap);

/// Bytes needed to hold an (S T) x (S T) dense matrix. Throws OverflowError
/// when the count does not fit in 64 bits.
std::uint64_t estimate_dense_bytes(std::int64_t S, std::int64_t T, std::int64_t bytes_per_entry);

/// R_{i,j}(l) = (1/T) * sum_k tau(i, j, k, l). The division is by T for every
/// lag, including lags whose sums have only T - l terms.
class Autocovariance {
 public:
  Autocovariance(Index S, Index L, std::vector<double> values);

  Index channels() const noexcept { return S_; }
  Index max_lag() const noexcept { return L_; }
  double at(Index i, Index j, Index l) const {
    return values_[static_cast<std::size_t>((l * S_ + i) * S_ + j)];
  }
  /// S x S matrix of (1/(L+1)) * sum_l R_{i,j}(l).
  Matrix lag_mean() const;
  /// (M + M') / 2 of the lag mean. Lags >= 1 are not symmetric in (i, j);
  /// the spatial graph needs an undirected weight per pair.
  Matrix symmetric_lag_mean() const;

 private:
  Index S_;
  Index L_;
  std::vector<double> values_;
};

Autocovariance collapse_autocovariance(const WeightTensor& tau);

/// Spatial graph used by the topology metrics. `adjacency` is what the
/// metrics walk; `weights`, when present, is the weighted graph it came from.
struct SpatialGraph {
  Matrix adjacency;
  std::optional<Matrix> weights;
  bool binary = false;

  Index size() const noexcept { return adjacency.rows(); }
};

/// W~_{i,j} = 1 iff the symmetric lag mean of R at (i, j) exceeds kappa.
/// Keeps that mean as the graph's weights.
SpatialGraph threshold_graph(const Autocovariance& R, double kappa);

/// Median of the S^2 symmetric lag-mean values of R.
double median_kappa(const Autocovariance& R);

}  // namespace hgsp
