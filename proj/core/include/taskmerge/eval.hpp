#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "taskmerge/features.hpp"
#include "taskmerge/gbdt.hpp"

// RMSE and tolerance-accuracy metrics, plus the hyperparameter sweep
// harness that retrains one model per grid point.

namespace taskmerge::eval {

struct EvalReport {
  double rmse = 0.0;
  double accuracy_pct = 0.0;  // percentage of |prediction - truth| <= tau
  double tau = 0.12;
  std::size_t count = 0;
};

/// Root mean squared error; throws on length mismatch or empty input.
double rmse(std::span<const double> predictions, std::span<const double> truths);

/// Percentage of predictions within tau of the truth; a deviation exactly
/// equal to tau counts as correct.
double accuracy(std::span<const double> predictions, std::span<const double> truths,
                double tau);

EvalReport evaluate(std::span<const double> predictions,
                    std::span<const double> truths, double tau);

/// Reports stratified by degree of merging of each row's features.
std::map<int, EvalReport> evaluate_per_degree(const Dataset& data,
                                              std::span<const double> predictions,
                                              double tau);

enum class Axis { NumTrees, LearningRate, MaxDepth, MinSamplesSplit, MinSamplesLeaf };

std::string_view to_string(Axis axis);        // "M", "L", "D", "S", "J"
Axis axis_from_string(std::string_view name);  // throws on unknown names

/// One sweep: retrain along `values` of `axis`, all other hyperparameters
/// taken from `fixed`; optionally crossed with a second series axis.
struct SweepSpec {
  Axis axis = Axis::NumTrees;
  std::vector<double> values;
  gbdt::Hyperparams fixed;
  std::optional<Axis> series;
  std::vector<double> series_values;

  void validate() const;  // non-empty, strictly increasing values
};

struct SweepRow {
  double value = 0.0;
  std::optional<double> series_value;
  double train_rmse = 0.0;
  double test_rmse = 0.0;
};

/// Trains one model per grid point and scores it on both sets. Rows follow
/// spec order: series-major, then axis values.
std::vector<SweepRow> sweep(const SweepSpec& spec, const Dataset& train,
                            const Dataset& test);

/// Plot-ready CSV: axis,series,value,series_value,train_rmse,test_rmse.
void write_sweep_csv(const SweepSpec& spec, std::span<const SweepRow> rows,
                     std::ostream& out);

}  // namespace taskmerge::eval
