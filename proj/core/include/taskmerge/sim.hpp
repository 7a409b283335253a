#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "taskmerge/gbdt.hpp"
#include "taskmerge/oracle.hpp"
#include "taskmerge/workload.hpp"

// Merge-aware queue simulator: admits a batch of tasks through the
// signature tables, decides per group whether to execute merged, and
// compares the resulting makespan against the same arrival order with
// merging disabled. Deterministic single-threaded event loop.

namespace taskmerge::sim {

struct MergePolicy {
  enum class Kind { Never, Always, Threshold };

  Kind kind = Kind::Always;
  double min_predicted_saving = 0.0;  // Threshold only

  static MergePolicy never() { return {Kind::Never, 0.0}; }
  static MergePolicy always() { return {Kind::Always, 0.0}; }
  static MergePolicy threshold(double min_predicted_saving);
};

struct SimReport {
  double makespan_merged = 0.0;
  double makespan_sequential = 0.0;
  double saving_pct = 0.0;  // (sequential - merged) / sequential * 100
  std::size_t groups_formed = 0;
  std::map<int, std::size_t> degree_histogram;
};

struct GroupTraceRow {
  std::size_t group_id = 0;
  int degree = 0;
  SimilarityLevel level = SimilarityLevel::None;
  std::optional<double> predicted_saving;  // set when a predictor is given
  double actual_saving = 0.0;
  double merged_time = 0.0;
  double sequential_time = 0.0;
};

/// Runs the batch through admission and FCFS dispatch onto `workers`
/// identical machines. Under Never the batch bypasses grouping entirely,
/// making the merged and sequential schedules identical; under Threshold a
/// group executes merged only when the predictor's saving estimate reaches
/// the policy threshold (groups below it run member-by-member), and a null
/// predictor is a configuration error.
SimReport run_sim(std::span<const TranscodeTask> tasks, const MergePolicy& policy,
                  const gbdt::SavingModel* predictor,
                  const oracle::OracleConfig& cfg, int workers,
                  std::vector<GroupTraceRow>* trace = nullptr);

struct MakespanRow {
  int degree = 0;       // 2..5
  double merged = 0.0;
  double sequential = 0.0;
};

/// Merged versus back-to-back totals for k = 2..5 distinct parameters of
/// one VIC operation kind on one segment.
std::vector<MakespanRow> makespan_table(const VideoMeta& video, OpKind vic_kind,
                                        const oracle::OracleConfig& cfg);

void write_report(const SimReport& report, std::ostream& out);
void write_trace_csv(std::span<const GroupTraceRow> rows, std::ostream& out);

}  // namespace taskmerge::sim
