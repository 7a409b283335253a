#pragma once

#include <compare>
#include <iosfwd>
#include <map>
#include <string>

#include "taskmerge/features.hpp"

// Naive predictor: a lookup table of mean savings keyed by the operation
// composition of the merged task. Ignores the video statics on purpose;
// that blindness is exactly what the boosted model improves on.

namespace taskmerge::baseline {

struct CompositionKey {
  int b_count = 0;
  int s_count = 0;
  int r_count = 0;
  int mpeg4 = 0;
  int vp9 = 0;
  int hevc = 0;

  static CompositionKey from(const FeatureVector& fv) {
    return {fv.b_count, fv.s_count, fv.r_count, fv.mpeg4, fv.vp9, fv.hevc};
  }

  friend auto operator<=>(const CompositionKey&, const CompositionKey&) = default;
};

class NaiveModel {
 public:
  NaiveModel() = default;
  NaiveModel(std::map<CompositionKey, double> table, double global_mean)
      : table_(std::move(table)), global_mean_(global_mean) {}

  /// Stored mean for the row's composition; global mean on a miss.
  double predict(const FeatureVector& x) const;

  const std::map<CompositionKey, double>& table() const { return table_; }
  double global_mean() const { return global_mean_; }

 private:
  std::map<CompositionKey, double> table_;
  double global_mean_ = 0.0;
};

/// Groups samples by composition and stores per-key mean savings.
NaiveModel fit_naive(const Dataset& train_set);

// Same versioned envelope as the boosted model, kind tag "naive".
void save_model(const NaiveModel& model, std::ostream& out);
void save_model_file(const NaiveModel& model, const std::string& path);
NaiveModel load_model(std::istream& in);
NaiveModel load_model_file(const std::string& path);

}  // namespace taskmerge::baseline
