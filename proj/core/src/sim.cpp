#include "taskmerge/sim.hpp"

#include <algorithm>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "taskmerge/features.hpp"
#include "text_util.hpp"

namespace taskmerge::sim {

MergePolicy MergePolicy::threshold(double min_predicted_saving) {
  if (!(min_predicted_saving >= 0.0) || min_predicted_saving >= 1.0)
    throw std::invalid_argument("policy threshold must be in [0, 1)");
  return {Kind::Threshold, min_predicted_saving};
}

namespace {

// FCFS list scheduling: each job, in order, starts on the earliest-free
// machine. Batch arrival at time zero.
double fcfs_makespan(std::span<const double> durations, int workers) {
  std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
  for (int w = 0; w < workers; ++w) free_at.push(0.0);
  double makespan = 0.0;
  for (double d : durations) {
    const double start = free_at.top();
    free_at.pop();
    const double end = start + d;
    free_at.push(end);
    makespan = std::max(makespan, end);
  }
  return makespan;
}

}  // namespace

SimReport run_sim(std::span<const TranscodeTask> tasks, const MergePolicy& policy,
                  const gbdt::SavingModel* predictor,
                  const oracle::OracleConfig& cfg, int workers,
                  std::vector<GroupTraceRow>* trace) {
  if (tasks.empty()) throw std::invalid_argument("no tasks to simulate");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (policy.kind == MergePolicy::Kind::Threshold && predictor == nullptr)
    throw std::invalid_argument("threshold policy requires a predictor model");

  // Group formation. Never disables merging outright, so every task forms
  // its own group in arrival order and both schedules are identical.
  std::vector<MergeGroup> groups;
  if (policy.kind == MergePolicy::Kind::Never) {
    groups.reserve(tasks.size());
    for (const TranscodeTask& t : tasks) groups.push_back(MergeGroup{{t}});
  } else {
    SignatureTables tables;
    for (const TranscodeTask& t : tasks) tables.admit(t);
    groups.assign(tables.groups().begin(), tables.groups().end());
  }

  SimReport report;
  report.groups_formed = groups.size();

  std::vector<double> merged_durations;
  for (const MergeGroup& group : groups) {
    ++report.degree_histogram[group.degree()];

    const std::vector<Operation> ops = group.operations();
    const double merged_time = oracle::exec_time_merged(group.video(), ops, cfg);
    double sequential_time = 0.0;
    for (const TranscodeTask& t : group.tasks)
      sequential_time += oracle::exec_time_individual(t.video, t.operation, cfg);

    std::optional<double> predicted;
    if (predictor != nullptr)
      predicted = predictor->predict(encode(group.video(), ops));

    bool execute_merged = false;
    switch (policy.kind) {
      case MergePolicy::Kind::Never: break;
      case MergePolicy::Kind::Always: execute_merged = true; break;
      case MergePolicy::Kind::Threshold:
        execute_merged = *predicted >= policy.min_predicted_saving;
        break;
    }

    if (execute_merged) {
      merged_durations.push_back(merged_time);
    } else {
      for (const TranscodeTask& t : group.tasks)
        merged_durations.push_back(
            oracle::exec_time_individual(t.video, t.operation, cfg));
    }

    if (trace != nullptr) {
      trace->push_back(GroupTraceRow{
          trace->size(), group.degree(), group.level(), predicted,
          (sequential_time - merged_time) / sequential_time, merged_time,
          sequential_time});
    }
  }

  // Baseline: the same arrival order with merging disabled.
  std::vector<double> sequential_durations;
  sequential_durations.reserve(tasks.size());
  for (const TranscodeTask& t : tasks)
    sequential_durations.push_back(
        oracle::exec_time_individual(t.video, t.operation, cfg));

  report.makespan_merged = fcfs_makespan(merged_durations, workers);
  report.makespan_sequential = fcfs_makespan(sequential_durations, workers);
  report.saving_pct = (report.makespan_sequential - report.makespan_merged) /
                      report.makespan_sequential * 100.0;
  return report;
}

std::vector<MakespanRow> makespan_table(const VideoMeta& video, OpKind vic_kind,
                                        const oracle::OracleConfig& cfg) {
  std::vector<Operation> params;
  switch (vic_kind) {
    case OpKind::Bitrate:
      for (int kbps : Operation::bitrate_values())
        params.push_back(Operation::bitrate(kbps));
      break;
    case OpKind::Framerate:
      for (int fps : Operation::framerate_values())
        params.push_back(Operation::framerate(fps));
      break;
    case OpKind::Resolution:
      for (auto [w, h] : Operation::resolution_values())
        params.push_back(Operation::resolution(w, h));
      break;
    case OpKind::Codec:
      throw std::invalid_argument("makespan_table expects a VIC operation kind");
  }

  std::vector<MakespanRow> rows;
  for (int degree = 2; degree <= 5; ++degree) {
    const std::span<const Operation> ops(params.data(),
                                         static_cast<std::size_t>(degree));
    double sequential = 0.0;
    for (const Operation& op : ops)
      sequential += oracle::exec_time_individual(video, op, cfg);
    rows.push_back(
        MakespanRow{degree, oracle::exec_time_merged(video, ops, cfg), sequential});
  }
  return rows;
}

void write_report(const SimReport& report, std::ostream& out) {
  out << "groups formed: " << report.groups_formed << '\n';
  out << "degree histogram:";
  for (const auto& [degree, count] : report.degree_histogram)
    out << ' ' << degree << 'x' << count;
  out << '\n';
  out << "makespan merged: " << detail::format_double(report.makespan_merged)
      << " s\n";
  out << "makespan sequential: "
      << detail::format_double(report.makespan_sequential) << " s\n";
  out << "saving: " << detail::format_double(report.saving_pct) << "%\n";
}

void write_trace_csv(std::span<const GroupTraceRow> rows, std::ostream& out) {
  out << "group_id,degree,level,predicted_saving,actual_saving,merged_time,"
         "sequential_time\n";
  for (const GroupTraceRow& row : rows) {
    out << row.group_id << ',' << row.degree << ',' << to_string(row.level) << ',';
    if (row.predicted_saving) out << detail::format_double(*row.predicted_saving);
    out << ',' << detail::format_double(row.actual_saving) << ','
        << detail::format_double(row.merged_time) << ','
        << detail::format_double(row.sequential_time) << '\n';
  }
}

}  // namespace taskmerge::sim
