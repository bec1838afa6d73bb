#include "hgsp/graph_learning.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <tuple>

#include "hgsp/errors.hpp"

namespace hgsp {

RowMatrix center_spatial(const Signal& x) {
  const auto& d = x.data();
  RowMatrix out = d;
  out.rowwise() -= d.colwise().mean();
  return out;
}

RowMatrix center_temporal(const Signal& x) {
  const auto& d = x.data();
  RowMatrix out = d;
  out.colwise() -= d.rowwise().mean();
  return out;
}

// ---------------------------------------------------------------------------
// WeightTensor

WeightTensor::WeightTensor(Index S, Index T, Index L, Storage storage)
    : S_(S), T_(T), L_(L), storage_(storage) {
  if (S <= 0 || T <= 0 || L < 0 || L >= T) throw ValueError("weight tensor: bad dimensions");
}

WeightTensor WeightTensor::from_dense(Index S, Index T, Index L, std::vector<double> values) {
  WeightTensor t(S, T, L, Storage::dense);
  if (values.size() != static_cast<std::size_t>(S * S * T * (L + 1))) {
    throw DimensionError("weight tensor: dense buffer has the wrong size");
  }
  t.dense_ = std::move(values);
  return t;
}

WeightTensor WeightTensor::from_entries(Index S, Index T, Index L, std::vector<Entry> entries) {
  WeightTensor t(S, T, L, Storage::coordinate);
  auto key = [](const Entry& e) { return std::tie(e.l, e.k, e.i, e.j); };
  for (std::size_t n = 0; n < entries.size(); ++n) {
    const auto& e = entries[n];
    if (e.i < 0 || e.i >= S || e.j < 0 || e.j >= S || e.l < 0 || e.l > L || e.k < e.l || e.k >= T) {
      throw ValueError("weight tensor: entry index out of range");
    }
    if (n > 0 && !(key(entries[n - 1]) < key(e))) {
      throw ValueError("weight tensor: entries must be sorted by (l, k, i, j) and unique");
    }
  }
  t.entries_ = std::move(entries);
  return t;
}

std::size_t WeightTensor::stored_entries() const noexcept {
  if (storage_ == Storage::coordinate) return entries_.size();
  std::size_t n = 0;
  for (Index l = 0; l <= L_; ++l) n += static_cast<std::size_t>((T_ - l) * S_ * S_);
  return n;
}

double WeightTensor::at(Index i, Index j, Index k, Index l) const {
  if (i < 0 || i >= S_ || j < 0 || j >= S_ || k < 0 || k >= T_ || l < 0 || l > L_) {
    throw DimensionError("weight tensor: index out of range");
  }
  if (k < l) return 0.0;
  if (storage_ == Storage::dense) return dense_[offset(i, j, k, l)];
  const Entry probe{i, j, k, l, 0.0};
  auto key = [](const Entry& e) { return std::tie(e.l, e.k, e.i, e.j); };
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                                   [&](const Entry& a, const Entry& b) { return key(a) < key(b); });
  if (it != entries_.end() && key(*it) == key(probe)) return it->value;
  return 0.0;
}

void WeightTensor::write_coordinates(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "# weight tensor S=" << S_ << " T=" << T_ << " L=" << L_ << "\n# i,j,k,l,value\n";
  for_each([&](const Entry& e) {
    out << e.i << ',' << e.j << ',' << e.k << ',' << e.l << ',' << e.value << '\n';
  });
  out.precision(old_precision);
}

// ---------------------------------------------------------------------------
// Weight learning

namespace {

struct Centered {
  RowMatrix spatial;
  RowMatrix temporal;
};

// Writes the S x S block for (k, l) into `block` (row-major).
inline void fill_block(const Centered& c, Index k, Index l, double* block) {
  const Index S = c.spatial.rows();
  if (l == 0) {
    for (Index i = 0; i < S; ++i) {
      const double xi = c.spatial(i, k);
      for (Index j = 0; j < S; ++j) block[i * S + j] = std::abs(xi * c.spatial(j, k));
    }
  } else {
    for (Index i = 0; i < S; ++i) {
      const double xi = c.temporal(i, k - l);
      for (Index j = 0; j < S; ++j) block[i * S + j] = std::abs(xi * c.temporal(j, k));
    }
  }
}

void check_lag(const Signal& x, Index max_lag) {
  if (max_lag < 0 || max_lag >= x.samples()) {
    throw ValueError("learn_weights: need 0 <= L < T (L=" + std::to_string(max_lag) +
                     ", T=" + std::to_string(x.samples()) + ")");
  }
}

bool use_dense(const Signal& x, Index L, std::size_t cap) {
  const auto S = static_cast<std::size_t>(x.channels());
  return S * S * static_cast<std::size_t>(x.samples()) * static_cast<std::size_t>(L + 1) <= cap;
}

template <bool Parallel>
WeightTensor learn(const Signal& x, Index L, std::size_t cap) {
  check_lag(x, L);
  const Index S = x.channels();
  const Index T = x.samples();
  const Centered c{center_spatial(x), center_temporal(x)};
  const Index block = S * S;

  if (use_dense(x, L, cap)) {
    std::vector<double> values(static_cast<std::size_t>(block * T * (L + 1)), 0.0);
#pragma omp parallel for schedule(static) if (Parallel)
    for (Index k = 0; k < T; ++k) {
      for (Index l = 0; l <= std::min(L, k); ++l) {
        fill_block(c, k, l, values.data() + (l * T + k) * block);
      }
    }
    return WeightTensor::from_dense(S, T, L, std::move(values));
  }

  // Coordinate storage: one entry list per (l, k) block, concatenated in order.
  std::vector<std::vector<WeightTensor::Entry>> blocks(static_cast<std::size_t>(T * (L + 1)));
#pragma omp parallel if (Parallel)
  {
    std::vector<double> scratch(static_cast<std::size_t>(block));
#pragma omp for schedule(static)
    for (Index k = 0; k < T; ++k) {
      for (Index l = 0; l <= std::min(L, k); ++l) {
        fill_block(c, k, l, scratch.data());
        auto& list = blocks[static_cast<std::size_t>(l * T + k)];
        for (Index i = 0; i < S; ++i) {
          for (Index j = 0; j < S; ++j) {
            const double v = scratch[static_cast<std::size_t>(i * S + j)];
            if (v != 0.0) list.push_back({i, j, k, l, v});
          }
        }
      }
    }
  }
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  std::vector<WeightTensor::Entry> entries;
  entries.reserve(total);
  for (const auto& b : blocks) entries.insert(entries.end(), b.begin(), b.end());
  return WeightTensor::from_entries(S, T, L, std::move(entries));
}

}  // namespace

WeightTensor learn_weights(const Signal& x, Index max_lag, std::size_t dense_tensor_cap) {
  return learn<true>(x, max_lag, dense_tensor_cap);
}

WeightTensor learn_weights_serial(const Signal& x, Index max_lag, std::size_t dense_tensor_cap) {
  return learn<false>(x, max_lag, dense_tensor_cap);
}

Matrix dense_adjacency(const WeightTensor& tau, Index vertex_cap) {
  const VertexIndexMap map{tau.channels(), tau.samples()};
  const Index N = map.vertex_count();
  if (N > vertex_cap) {
    throw SizeError("dense adjacency of " + std::to_string(N) + " vertices exceeds the cap of " +
                    std::to_string(vertex_cap) + " (" +
                    std::to_string(estimate_dense_bytes(tau.channels(), tau.samples(), 8)) +
                    " bytes); downsample first");
  }
  Matrix W = Matrix::Zero(N, N);
  tau.for_each([&](const WeightTensor::Entry& e) {
    const Index u = map.flat(e.i, e.k - e.l);
    const Index v = map.flat(e.j, e.k);
    W(u, v) = e.value;
    W(v, u) = e.value;
  });
  return W;
}

std::uint64_t estimate_dense_bytes(std::int64_t S, std::int64_t T, std::int64_t bytes_per_entry) {
  if (S <= 0 || T <= 0 || bytes_per_entry <= 0) {
    throw ValueError("estimate_dense_bytes: arguments must be positive");
  }
  std::uint64_t n = 0;
  std::uint64_t squared = 0;
  std::uint64_t bytes = 0;
  if (__builtin_mul_overflow(static_cast<std::uint64_t>(S), static_cast<std::uint64_t>(T), &n) ||
      __builtin_mul_overflow(n, n, &squared) ||
      __builtin_mul_overflow(squared, static_cast<std::uint64_t>(bytes_per_entry), &bytes)) {
    throw OverflowError("estimate_dense_bytes: result does not fit in 64 bits");
  }
  return bytes;
}

// ---------------------------------------------------------------------------
// Autocovariance and thresholding

Autocovariance::Autocovariance(Index S, Index L, std::vector<double> values)
    : S_(S), L_(L), values_(std::move(values)) {
  if (S <= 0 || L < 0 || values_.size() != static_cast<std::size_t>(S * S * (L + 1))) {
    throw DimensionError("autocovariance: bad dimensions");
  }
}

Matrix Autocovariance::lag_mean() const {
  Matrix m = Matrix::Zero(S_, S_);
  for (Index l = 0; l <= L_; ++l) {
    for (Index i = 0; i < S_; ++i) {
      for (Index j = 0; j < S_; ++j) m(i, j) += at(i, j, l);
    }
  }
  return m / static_cast<double>(L_ + 1);
}

Matrix Autocovariance::symmetric_lag_mean() const {
  const Matrix m = lag_mean();
  return 0.5 * (m + m.transpose());
}

Autocovariance collapse_autocovariance(const WeightTensor& tau) {
  const Index S = tau.channels();
  const Index L = tau.max_lag();
  std::vector<double> sums(static_cast<std::size_t>(S * S * (L + 1)), 0.0);
  tau.for_each([&](const WeightTensor::Entry& e) {
    sums[static_cast<std::size_t>((e.l * S + e.i) * S + e.j)] += e.value;
  });
  const auto T = static_cast<double>(tau.samples());
  for (auto& s : sums) s /= T;
  return Autocovariance(S, L, std::move(sums));
}

SpatialGraph threshold_graph(const Autocovariance& R, double kappa) {
  if (!(kappa >= 0.0)) throw ValueError("threshold_graph: kappa must be >= 0");
  Matrix mean = R.symmetric_lag_mean();
  Matrix adjacency = (mean.array() > kappa).cast<double>().matrix();
  return SpatialGraph{std::move(adjacency), std::move(mean), true};
}

double median_kappa(const Autocovariance& R) {
  const Matrix mean = R.symmetric_lag_mean();
  std::vector<double> v(mean.data(), mean.data() + mean.size());
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace hgsp
