#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

// Test-only brute-force oracle for least-squares stump fitting: enumerates
// every (feature, midpoint-threshold) pair, routes samples by value <=
// threshold, and scores children by directly computed sums of squared
// deviations from the child mean. Shares no code with the tree builder.

namespace taskmerge::testing {

struct BruteSplit {
  int feature = -1;
  double threshold = 0.0;
  double sse_reduction = 0.0;
  double left_mean = 0.0;
  double right_mean = 0.0;
};

inline double sse_around_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sse = 0.0;
  for (double v : values) sse += (v - mean) * (v - mean);
  return sse;
}

inline std::optional<BruteSplit> brute_force_stump(
    const std::vector<std::vector<double>>& columns,
    std::span<const double> residuals, int min_samples_leaf) {
  const std::size_t n = residuals.size();
  std::vector<double> all(residuals.begin(), residuals.end());
  const double parent_sse = sse_around_mean(all);

  std::optional<BruteSplit> best;
  for (std::size_t f = 0; f < columns.size(); ++f) {
    // candidate thresholds: midpoints between consecutive distinct values
    std::vector<double> sorted(columns[f].begin(), columns[f].end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(sorted[i + 1] > sorted[i])) continue;
      const double threshold = (sorted[i] + sorted[i + 1]) * 0.5;
      if (!(threshold < sorted[i + 1])) continue;

      std::vector<double> left, right;
      for (std::size_t s = 0; s < n; ++s)
        (columns[f][s] <= threshold ? left : right).push_back(residuals[s]);
      if (left.size() < static_cast<std::size_t>(min_samples_leaf) ||
          right.size() < static_cast<std::size_t>(min_samples_leaf))
        continue;

      const double reduction =
          parent_sse - sse_around_mean(left) - sse_around_mean(right);
      if (reduction > 0.0 && (!best || reduction > best->sse_reduction)) {
        double left_mean = 0.0, right_mean = 0.0;
        for (double v : left) left_mean += v;
        for (double v : right) right_mean += v;
        best = BruteSplit{static_cast<int>(f), threshold, reduction,
                          left_mean / static_cast<double>(left.size()),
                          right_mean / static_cast<double>(right.size())};
      }
    }
  }
  return best;
}

}  // namespace taskmerge::testing
