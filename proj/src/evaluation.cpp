#include "hgsp/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "hgsp/errors.hpp"
#include "hgsp/pipeline.hpp"

namespace hgsp {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over seed and stream
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<LabeledSignal> generate_synthetic(std::size_t n_per_class, Index channels, Index samples,
                                              double sample_rate_hz, std::uint64_t seed) {
  std::vector<LabeledSignal> out;
  out.reserve(2 * n_per_class);
  for (std::size_t n = 0; n < 2 * n_per_class; ++n) {
    const int label = static_cast<int>(n % 2);
    std::mt19937_64 rng(mix_seed(seed, n));
    std::normal_distribution<double> noise(0.0, 1.0);
    RowMatrix data(channels, samples);
    for (Index i = 0; i < channels; ++i) {
      for (Index k = 0; k < samples; ++k) data(i, k) = noise(rng);
    }
    if (label == 1) {
      std::uniform_real_distribution<double> freq(4.0, 8.0);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
      const double f = freq(rng);
      const double phi = phase(rng);
      for (Index k = 0; k < samples; ++k) {
        const double shared =
            2.0 * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(k) / sample_rate_hz + phi);
        data.col(k).array() += shared;
      }
    }
    out.push_back({Signal(std::move(data), sample_rate_hz), label});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trees

double gini(double positives, double total) {
  if (total <= 0.0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

double DecisionTree::predict(std::span<const double> row) const {
  int n = 0;
  while (nodes[n].feature >= 0) {
    n = row[static_cast<std::size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left
                                                                              : nodes[n].right;
  }
  return nodes[n].value;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    if (nodes[n].feature < 0) continue;
    d[nodes[n].left] = d[nodes[n].right] = d[n] + 1;
    best = std::max(best, d[n] + 1);
  }
  return best;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity, n_left g_left + n_right g_right
};

class TreeBuilder {
 public:
  TreeBuilder(const LabeledDataset& data, const ForestConfig& cfg, int mtry, std::uint64_t seed)
      : data_(data), cfg_(cfg), mtry_(mtry), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = data_.rows();
    std::vector<std::size_t> sample(n);
    if (cfg_.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& s : sample) s = pick(rng_);
    } else {
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    double positives = 0.0;
    for (auto s : idx) positives += data_.labels[s];
    const double total = static_cast<double>(idx.size());
    tree_.nodes[id].value = positives / total;

    const bool pure = positives == 0.0 || positives == total;
    const bool depth_limited = cfg_.max_depth > 0 && depth >= cfg_.max_depth;
    if (pure || depth_limited || idx.size() < 2 * static_cast<std::size_t>(cfg_.min_leaf)) return id;

    const Split split = best_split(idx);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto s : idx) {
      (data_.features(static_cast<Index>(s), split.feature) <= split.threshold ? left : right).push_back(s);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Examines features in random order until mtry non-constant ones were scored.
  Split best_split(const std::vector<std::size_t>& idx) {
    const std::size_t d = data_.dims();
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng_);

    Split best;
    double best_impurity = std::numeric_limits<double>::infinity();
    int scored = 0;
    std::vector<std::pair<double, int>> column(idx.size());
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf);
    double all_pos = 0.0;
    for (auto s : idx) all_pos += data_.labels[s];

    for (int f : order) {
      if (scored >= mtry_) break;
      for (std::size_t n = 0; n < idx.size(); ++n) {
        column[n] = {data_.features(static_cast<Index>(idx[n]), f), data_.labels[idx[n]]};
      }
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      double left_pos = 0.0;
      for (std::size_t p = 0; p + 1 < column.size(); ++p) {
        left_pos += column[p].second;
        if (column[p].first == column[p + 1].first) continue;
        const std::size_t nl = p + 1;
        const std::size_t nr = column.size() - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double impurity = static_cast<double>(nl) * gini(left_pos, static_cast<double>(nl)) +
                                static_cast<double>(nr) * gini(all_pos - left_pos, static_cast<double>(nr));
        if (impurity < best_impurity) {
          best_impurity = impurity;
          double threshold = 0.5 * (column[p].first + column[p + 1].first);
          if (!(threshold < column[p + 1].first)) threshold = column[p].first;
          best = {f, threshold, impurity};
        }
      }
    }
    return best;
  }

  const LabeledDataset& data_;
  const ForestConfig& cfg_;
  int mtry_;
  std::mt19937_64 rng_;
  DecisionTree tree_;
};

void validate_training(const LabeledDataset& train, const ForestConfig& cfg) {
  if (train.labels.size() != train.rows()) throw DimensionError("forest: label count != row count");
  if (train.rows() == 0 || train.dims() == 0) throw ValueError("forest: empty training set");
  bool has0 = false;
  bool has1 = false;
  for (int y : train.labels) {
    if (y != 0 && y != 1) throw ValueError("forest: labels must be 0 or 1");
    (y ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw ValueError("forest: training set needs both classes");
  if (cfg.n_trees < 1 || cfg.min_leaf < 1 || cfg.max_depth < 0 || cfg.features_per_split < 0) {
    throw ValueError("forest: invalid configuration");
  }
  if (static_cast<std::size_t>(cfg.features_per_split) > train.dims()) {
    throw ValueError("forest: features_per_split exceeds the feature count");
  }
}

template <bool Parallel>
RandomForest train(const LabeledDataset& data, const ForestConfig& cfg) {
  validate_training(data, cfg);
  const int mtry = cfg.features_per_split > 0
                       ? cfg.features_per_split
                       : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.dims()))));
  std::vector<DecisionTree> trees(static_cast<std::size_t>(cfg.n_trees));
#pragma omp parallel for schedule(dynamic) if (Parallel)
  for (int t = 0; t < cfg.n_trees; ++t) {
    trees[t] = TreeBuilder(data, cfg, mtry, mix_seed(cfg.seed, static_cast<std::uint64_t>(t))).build();
  }
  return RandomForest(std::move(trees), data.dims());
}

}  // namespace

RandomForest train_forest(const LabeledDataset& train_set, const ForestConfig& cfg) {
  return train<true>(train_set, cfg);
}

RandomForest train_forest_serial(const LabeledDataset& train_set, const ForestConfig& cfg) {
  return train<false>(train_set, cfg);
}

std::vector<double> RandomForest::predict_scores(const RowMatrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != dims_) {
    throw DimensionError("predict_scores: expected " + std::to_string(dims_) + " features, got " +
                         std::to_string(features.cols()));
  }
  std::vector<double> scores(static_cast<std::size_t>(features.rows()), 0.0);
  for (Index r = 0; r < features.rows(); ++r) {
    const std::span<const double> row(features.row(r).data(), dims_);
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree.predict(row);
    scores[r] = sum / static_cast<double>(trees_.size());
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Scoring

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
  std::uint64_t twice_credit = 0;  // 2 * concordant + ties
  std::size_t g = 0;
  while (g < order.size()) {
    std::size_t end = g;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[g]]) {
      const int y = labels[order[end]];
      if (y != 0 && y != 1) throw ValueError("auc: labels must be 0 or 1");
      (y ? group_pos : group_neg) += 1;
      ++end;
    }
    twice_credit += 2 * group_pos * neg + group_pos * group_neg;
    pos += group_pos;
    neg += group_neg;
    g = end;
  }
  if (pos == 0 || neg == 0) throw ValueError("auc: both classes must be present");
  return static_cast<double>(twice_credit) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<std::size_t> select_top_variance(const RowMatrix& features, std::size_t q) {
  const auto d = static_cast<std::size_t>(features.cols());
  q = std::min(q, d);
  std::vector<double> var(d);
  for (std::size_t f = 0; f < d; ++f) {
    const auto col = features.col(static_cast<Index>(f)).array();
    var[f] = (col - col.mean()).square().mean();
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
  order.resize(q);
  std::sort(order.begin(), order.end());
  return order;
}

// ---------------------------------------------------------------------------
// Experiment

bool ExperimentReport::same_result(const ExperimentReport& o) const {
  return seed == o.seed && config_hash == o.config_hash && auc == o.auc &&
         n_features == o.n_features && n_train == o.n_train && n_test == o.n_test &&
         failed_samples == o.failed_samples;
}

std::uint64_t config_hash(const PipelineConfig& cfg, const ForestConfig& forest,
                          const ExperimentParams& params) {
  std::ostringstream text;
  text.precision(17);
  text << to_text(cfg) << "n_trees=" << forest.n_trees << "\nmax_depth=" << forest.max_depth
       << "\nmin_leaf=" << forest.min_leaf << "\nfeatures_per_split=" << forest.features_per_split
       << "\nbootstrap=" << forest.bootstrap << "\nn_per_class=" << params.n_per_class
       << "\nchannels=" << params.channels << "\nsamples=" << params.samples
       << "\nsample_rate_hz=" << params.sample_rate_hz << "\nshuffle_labels=" << params.shuffle_labels
       << "\nselect_top=" << params.select_top << '\n';
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

LabeledDataset take_rows(const RowMatrix& features, const std::vector<int>& labels,
                         const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                         const std::vector<std::string>& names) {
  LabeledDataset d;
  d.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      d.features(static_cast<Index>(r), static_cast<Index>(c)) =
          features(static_cast<Index>(rows[r]), static_cast<Index>(cols[c]));
    }
    d.labels.push_back(labels[rows[r]]);
  }
  for (auto c : cols) d.names.push_back(names[c]);
  return d;
}

}  // namespace

ExperimentReport run_experiment(const PipelineConfig& cfg, const ForestConfig& forest,
                                const ExperimentParams& params) {
  ExperimentReport report;
  report.seed = params.seed;
  report.config_hash = config_hash(cfg, forest, params);

  auto start = Clock::now();
  const auto data = generate_synthetic(params.n_per_class, params.channels, params.samples,
                                       params.sample_rate_hz, params.seed);
  report.timings.generate_s = seconds_since(start);

  start = Clock::now();
  std::vector<Signal> signals;
  signals.reserve(data.size());
  for (const auto& d : data) signals.push_back(d.signal);
  const auto batch = extract_batch(signals, cfg);
  report.timings.extract_s = seconds_since(start);

  // Keep the samples that extracted cleanly.
  std::vector<std::size_t> kept;
  for (std::size_t s = 0; s < batch.rows.size(); ++s) {
    if (batch.rows[s]) kept.push_back(s);
  }
  report.failed_samples = batch.rows.size() - kept.size();
  const std::size_t d = batch.names.size();
  RowMatrix features(static_cast<Index>(kept.size()), static_cast<Index>(d));
  std::vector<int> labels;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const auto& row = *batch.rows[kept[r]];
    std::copy(row.begin(), row.end(), features.row(static_cast<Index>(r)).data());
    labels.push_back(data[kept[r]].label);
  }

  if (params.shuffle_labels) {
    std::mt19937_64 rng(mix_seed(params.seed, 0x5be1));
    std::shuffle(labels.begin(), labels.end(), rng);
  }

  // Class-stratified half/half split.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::mt19937_64 split_rng(mix_seed(params.seed, 0x5917));
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] == cls) members.push_back(r);
    }
    std::shuffle(members.begin(), members.end(), split_rng);
    const std::size_t half = members.size() / 2;
    train_rows.insert(train_rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(half));
    test_rows.insert(test_rows.end(), members.begin() + static_cast<std::ptrdiff_t>(half), members.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  std::vector<std::size_t> columns(d);
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  if (params.select_top > 0) {
    RowMatrix train_only(static_cast<Index>(train_rows.size()), static_cast<Index>(d));
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      train_only.row(static_cast<Index>(r)) = features.row(static_cast<Index>(train_rows[r]));
    }
    columns = select_top_variance(train_only, params.select_top);
  }
  const auto train_set = take_rows(features, labels, train_rows, columns, batch.names);
  const auto test_set = take_rows(features, labels, test_rows, columns, batch.names);
  report.n_features = columns.size();
  report.n_train = train_rows.size();
  report.n_test = test_rows.size();

  start = Clock::now();
  ForestConfig seeded = forest;
  seeded.seed = mix_seed(params.seed, 0xf0e57);
  const auto model = train_forest(train_set, seeded);
  report.timings.train_s = seconds_since(start);

  start = Clock::now();
  const auto scores = model.predict_scores(test_set.features);
  report.auc = auc(scores, test_set.labels);
  report.timings.score_s = seconds_since(start);
  return report;
}

std::string report_csv_header(bool with_timings) {
  std::string h = "seed,config_hash,auc,n_features,n_train,n_test,failed_samples";
  if (with_timings) h += ",generate_s,extract_s,train_s,score_s";
  return h;
}

std::string report_csv_row(const ExperimentReport& r, bool with_timings) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
  char auc_text[32];
  const auto end = std::to_chars(auc_text, auc_text + sizeof auc_text, r.auc).ptr;
  std::ostringstream out;
  out << r.seed << ',' << hash << ',' << std::string_view(auc_text, end - auc_text) << ',' << r.n_features << ',' << r.n_train << ','
      << r.n_test << ',' << r.failed_samples;
  if (with_timings) {
    out.precision(6);
    out << ',' << r.timings.generate_s << ',' << r.timings.extract_s << ',' << r.timings.train_s
        << ',' << r.timings.score_s;
  }
  return out.str();
}

}  // namespace hgsp
