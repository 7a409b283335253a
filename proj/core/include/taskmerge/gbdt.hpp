#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taskmerge/features.hpp"

// Gradient-boosted regression trees, built from scratch. Squared-error
// loss, so each boosting round fits a tree to the plain residuals
// y - B_{m-1}(x) (the negative loss gradient) and the ensemble predicts
// B_0 + L * sum of tree outputs. Training is fully deterministic: no
// row/column subsampling, and split ties break toward the lowest feature
// index, then the lowest threshold.

namespace taskmerge::gbdt {

struct Hyperparams {
  int num_trees = 350;          // M
  double learning_rate = 0.1;   // L
  int max_depth = 11;           // D
  int min_samples_split = 30;   // S
  int min_samples_leaf = 2;     // J

  /// Throws std::invalid_argument on an out-of-range value. num_trees = 0
  /// is allowed and yields the base (mean-predicting) model.
  void validate() const;
};

struct SplitCandidate {
  double threshold = 0.0;
  double sse_reduction = 0.0;
};

/// Best least-squares split of a single feature column; values[i] pairs
/// with residuals[i]. Scans midpoints between consecutive distinct sorted
/// values and returns the threshold maximizing the SSE reduction subject to
/// both children holding at least min_samples_leaf samples, or nullopt when
/// no legal split strictly improves the SSE. Samples route left iff
/// value <= threshold.
std::optional<SplitCandidate> best_split(std::span<const double> values,
                                         std::span<const double> residuals,
                                         int min_samples_leaf);

/// One regression tree stored as a flat node array in pre-order; the root
/// is node 0.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction

    bool is_leaf() const { return feature < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes);

  double predict(std::span<const double> x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;
  std::size_t leaf_count() const;

 private:
  std::vector<Node> nodes_;
};

/// Greedy recursive construction against the residual vector. Columns are
/// feature-major: columns[f][i] is feature f of sample i. A node becomes a
/// leaf (value = mean residual) at depth max_depth, below min_samples_split
/// samples, or when no legal split remains. When out_predictions is
/// non-empty it receives the fitted value of every training sample.
RegressionTree fit_tree(const std::vector<std::vector<double>>& columns,
                        std::span<const double> residuals, const Hyperparams& hp,
                        std::span<double> out_predictions = {});

/// The boosted ensemble: base prediction plus learning-rate-scaled trees.
/// Immutable once trained; safe for concurrent prediction.
class SavingModel {
 public:
  SavingModel() = default;
  SavingModel(double base_prediction, Hyperparams hp, int feature_count,
              std::vector<RegressionTree> trees);

  /// B_0 + L * sum of tree outputs. Throws on a dimension mismatch.
  double predict(std::span<const double> x) const;
  double predict(const FeatureVector& x) const;

  double base_prediction() const { return base_prediction_; }
  double learning_rate() const { return hp_.learning_rate; }
  int feature_count() const { return feature_count_; }
  const Hyperparams& hyperparams() const { return hp_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 private:
  double base_prediction_ = 0.0;
  Hyperparams hp_;
  int feature_count_ = 0;
  std::vector<RegressionTree> trees_;
};

/// Per-iteration training diagnostics (index m holds the state after m+1
/// trees).
struct TrainTrace {
  std::vector<double> train_sse;
};

/// Boosting on feature-major columns. B_0 is the target mean; round m fits
/// a tree to the residuals of B_{m-1} and adds it with weight L.
SavingModel train(const std::vector<std::vector<double>>& columns,
                  std::span<const double> targets, const Hyperparams& hp,
                  TrainTrace* trace = nullptr);

/// Convenience over a feature-vector dataset.
SavingModel train(const Dataset& train_set, const Hyperparams& hp,
                  TrainTrace* trace = nullptr);

// Versioned text serialization; loading a saved model reproduces its
// predictions bit-exactly. Trees are stored in pre-order, one node per
// line ("I <feature> <threshold>" / "L <value>").
void save_model(const SavingModel& model, std::ostream& out);
void save_model_file(const SavingModel& model, const std::string& path);
SavingModel load_model(std::istream& in);
SavingModel load_model_file(const std::string& path);

}  // namespace taskmerge::gbdt
