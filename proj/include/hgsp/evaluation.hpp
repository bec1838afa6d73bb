#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hgsp/config.hpp"
#include "hgsp/signal.hpp"

namespace hgsp {

// ---------------------------------------------------------------------------
// Synthetic data

struct LabeledSignal {
  Signal signal;
  int label;  // 1 = ictal, 0 = interictal
};

/// 2 * n_per_class samples, alternating interictal / ictal. Interictal
/// channels are independent unit-variance Gaussian noise; ictal samples add
/// one shared 4-8 Hz sinusoid of amplitude 2 to every channel.
std::vector<LabeledSignal> generate_synthetic(std::size_t n_per_class, Index channels, Index samples,
                                              double sample_rate_hz, std::uint64_t seed);

/// Stateless 64-bit mixer used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// ---------------------------------------------------------------------------
// Random forest

struct LabeledDataset {
  RowMatrix features;  // n x d
  std::vector<int> labels;
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(features.rows()); }
  std::size_t dims() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 0;           // 0 = unlimited
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  bool bootstrap = true;
  std::uint64_t seed = 1;
};

/// Binary CART tree with single-feature threshold splits (go left when x <= threshold).
struct DecisionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // class-1 fraction of the training samples in the node
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> row) const;
  int depth() const;
};

class RandomForest {
 public:
  RandomForest(std::vector<DecisionTree> trees, std::size_t dims)
      : trees_(std::move(trees)), dims_(dims) {}

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  std::size_t dims() const noexcept { return dims_; }

  /// Mean over trees of the leaf's class-1 fraction, one score per row.
  std::vector<double> predict_scores(const RowMatrix& features) const;

 private:
  std::vector<DecisionTree> trees_;
  std::size_t dims_;
};

/// Bagged Gini trees, parallel over trees. Each tree draws from its own
/// seed, so the forest does not depend on the thread count.
RandomForest train_forest(const LabeledDataset& train, const ForestConfig& cfg);

/// Single-threaded reference for `train_forest`.
RandomForest train_forest_serial(const LabeledDataset& train, const ForestConfig& cfg);

/// Gini impurity 2 p (1 - p) of a node with `positives` of `total` in class 1.
double gini(double positives, double total);

// ---------------------------------------------------------------------------
// Scoring

/// Mann-Whitney AUC: (concordant + 0.5 ties) / (n_pos n_neg).
double auc(std::span<const double> scores, std::span<const int> labels);

/// Indices of the q highest-variance columns of `features`, ascending.
std::vector<std::size_t> select_top_variance(const RowMatrix& features, std::size_t q);

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentParams {
  std::size_t n_per_class = 100;
  Index channels = 8;
  Index samples = 400;
  double sample_rate_hz = 400.0;
  std::uint64_t seed = 42;
  bool shuffle_labels = false;
  std::size_t select_top = 0;  // 0 keeps every feature
};

struct StageTimings {
  double generate_s = 0.0;
  double extract_s = 0.0;
  double train_s = 0.0;
  double score_s = 0.0;
};

struct ExperimentReport {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double auc = 0.0;
  std::size_t n_features = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t failed_samples = 0;
  StageTimings timings;

  /// Compares every field except the wall-clock timings.
  bool same_result(const ExperimentReport& other) const;
};

/// generate -> extract -> stratified half/half split -> forest -> AUC on the
/// test half. Every random choice derives from params.seed; the forest seed in
/// `forest` is replaced by one derived from it.
ExperimentReport run_experiment(const PipelineConfig& cfg, const ForestConfig& forest,
                                const ExperimentParams& params);

std::uint64_t config_hash(const PipelineConfig& cfg, const ForestConfig& forest,
                          const ExperimentParams& params);

/// CSV header and row. Timing columns are appended only when asked for, so
/// the default report is byte-identical across runs.
std::string report_csv_header(bool with_timings);
std::string report_csv_row(const ExperimentReport& r, bool with_timings);

}  // namespace hgsp
