// taskmerge CLI: generate oracle datasets, train/evaluate saving predictors,
// run hyperparameter sweeps, and simulate merge-aware scheduling.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "taskmerge/baseline.hpp"
#include "taskmerge/eval.hpp"
#include "taskmerge/features.hpp"
#include "taskmerge/gbdt.hpp"
#include "taskmerge/model_file.hpp"
#include "taskmerge/oracle.hpp"
#include "taskmerge/sim.hpp"
#include "taskmerge/workload.hpp"

namespace {

using namespace taskmerge;

constexpr std::uint64_t kDefaultSeed = 42;

struct OracleFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> vic_sigma;
  std::optional<double> codec_sigma;

  void attach(CLI::App& cmd) {
    cmd.add_option("--oracle-config", config_path,
                   "Oracle config file (key = value lines)");
    cmd.add_option("--seed", seed, "RNG seed (overrides the config file)")
        ->default_str(std::to_string(kDefaultSeed));
    cmd.add_option("--vic-sigma", vic_sigma, "VIC per-phase noise sigma");
    cmd.add_option("--codec-sigma", codec_sigma, "Codec per-phase noise sigma");
  }

  oracle::OracleConfig resolve() const {
    oracle::OracleConfig cfg;
    if (!config_path.empty()) cfg = oracle::load_oracle_config(config_path);
    cfg.rng_seed = seed.value_or(config_path.empty() ? kDefaultSeed : cfg.rng_seed);
    if (vic_sigma) cfg.vic_noise_sigma = *vic_sigma;
    if (codec_sigma) cfg.codec_noise_sigma = *codec_sigma;
    cfg.validate();
    return cfg;
  }
};

struct HyperFlags {
  gbdt::Hyperparams hp;

  void attach(CLI::App& cmd) {
    cmd.add_option("--trees", hp.num_trees, "Number of boosting rounds (M)")
        ->capture_default_str();
    cmd.add_option("--learning-rate", hp.learning_rate, "Learning rate (L)")
        ->capture_default_str();
    cmd.add_option("--max-depth", hp.max_depth, "Maximum tree depth (D)")
        ->capture_default_str();
    cmd.add_option("--min-split", hp.min_samples_split,
                   "Minimum samples to split a node (S)")
        ->capture_default_str();
    cmd.add_option("--min-leaf", hp.min_samples_leaf,
                   "Minimum samples per leaf (J)")
        ->capture_default_str();
  }
};

std::vector<double> predictions_of(const gbdt::SavingModel& model,
                                   const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const Sample& s : data.samples) out.push_back(model.predict(s.features));
  return out;
}

std::vector<double> predictions_of(const baseline::NaiveModel& model,
                                   const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const Sample& s : data.samples) out.push_back(model.predict(s.features));
  return out;
}

std::vector<double> targets_of(const Dataset& data) {
  std::vector<double> out;
  out.reserve(data.size());
  for (const Sample& s : data.samples) out.push_back(s.saving);
  return out;
}

void cmd_gen(int videos, int cases, const OracleFlags& oracle_flags,
             const std::string& out_path) {
  const oracle::OracleConfig cfg = oracle_flags.resolve();
  const Dataset data = oracle::generate_dataset(videos, cases, cfg);
  write_csv_file(data, out_path);
  std::printf("wrote %zu samples to %s (videos=%d cases=%d seed=%llu)\n",
              data.size(), out_path.c_str(), videos, cases,
              static_cast<unsigned long long>(cfg.rng_seed));
}

void cmd_train(const std::string& data_path, const std::string& out_path,
               const std::string& kind, double split_fraction, std::uint64_t seed,
               const HyperFlags& hyper, const std::string& test_out) {
  const Dataset data = read_csv_file(data_path);

  Dataset train_set;
  std::optional<Dataset> test_set;
  if (split_fraction >= 1.0) {
    train_set = data;
  } else {
    auto parts = split(data, split_fraction, seed);
    train_set = std::move(parts.first);
    test_set = std::move(parts.second);
  }
  if (test_set && !test_out.empty()) write_csv_file(*test_set, test_out);

  const std::vector<double> train_truth = targets_of(train_set);

  std::vector<double> train_pred, test_pred;
  if (kind == "gbdt") {
    const gbdt::SavingModel model = gbdt::train(train_set, hyper.hp);
    gbdt::save_model_file(model, out_path);
    train_pred = predictions_of(model, train_set);
    if (test_set) test_pred = predictions_of(model, *test_set);
    std::printf("trained gbdt model: M=%d L=%g D=%d S=%d J=%d on %zu samples\n",
                hyper.hp.num_trees, hyper.hp.learning_rate, hyper.hp.max_depth,
                hyper.hp.min_samples_split, hyper.hp.min_samples_leaf,
                train_set.size());
  } else if (kind == "naive") {
    const baseline::NaiveModel model = baseline::fit_naive(train_set);
    baseline::save_model_file(model, out_path);
    train_pred = predictions_of(model, train_set);
    if (test_set) test_pred = predictions_of(model, *test_set);
    std::printf("trained naive model: %zu composition entries on %zu samples\n",
                model.table().size(), train_set.size());
  } else {
    throw CLI::ValidationError("--kind", "expected 'gbdt' or 'naive'");
  }

  std::printf("train rmse: %.6f\n", eval::rmse(train_pred, train_truth));
  if (test_set) {
    std::printf("test rmse: %.6f\n",
                eval::rmse(test_pred, targets_of(*test_set)));
    if (!test_out.empty())
      std::printf("held-out split written to %s (%zu samples)\n",
                  test_out.c_str(), test_set->size());
  }
  std::printf("model written to %s\n", out_path.c_str());
}

FeatureVector parse_feature_row(const std::string& csv) {
  std::vector<double> values;
  std::string field;
  std::istringstream ss(csv);
  while (std::getline(ss, field, ',')) {
    try {
      values.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad feature value '" + field + "'");
    }
  }
  if (values.size() != FeatureVector::kFeatureCount)
    throw std::invalid_argument(
        "expected " + std::to_string(FeatureVector::kFeatureCount) +
        " comma-separated values (" + std::string(kDatasetCsvHeader) +
        " without the saving column)");
  FeatureVector f;
  f.duration_s = values[0];
  f.size_kb = values[1];
  f.framerate = values[2];
  f.width = static_cast<int>(values[3]);
  f.height = static_cast<int>(values[4]);
  f.b_count = static_cast<int>(values[5]);
  f.s_count = static_cast<int>(values[6]);
  f.r_count = static_cast<int>(values[7]);
  f.mpeg4 = static_cast<int>(values[8]);
  f.vp9 = static_cast<int>(values[9]);
  f.hevc = static_cast<int>(values[10]);
  f.validate();
  return f;
}

void cmd_predict(const std::string& model_path, const std::string& features_csv,
                 const std::string& data_path) {
  if (features_csv.empty() == data_path.empty())
    throw CLI::ValidationError("predict",
                               "give exactly one of --features or --data");

  std::vector<FeatureVector> rows;
  if (!features_csv.empty()) {
    rows.push_back(parse_feature_row(features_csv));
  } else {
    for (const Sample& s : read_csv_file(data_path).samples)
      rows.push_back(s.features);
  }

  const std::string kind = model_file_kind(model_path);
  std::vector<double> predictions;
  if (kind == "gbdt") {
    const gbdt::SavingModel model = gbdt::load_model_file(model_path);
    for (const FeatureVector& f : rows) predictions.push_back(model.predict(f));
  } else if (kind == "naive") {
    const baseline::NaiveModel model = baseline::load_model_file(model_path);
    for (const FeatureVector& f : rows) predictions.push_back(model.predict(f));
  } else {
    throw std::runtime_error("unsupported model kind '" + kind + "'");
  }
  for (double p : predictions) std::printf("%.6f\n", p);
}

void print_report_line(const char* label, const eval::EvalReport& report) {
  std::printf("%s n=%zu rmse=%.6f accuracy(tau=%g)=%.2f%%\n", label, report.count,
              report.rmse, report.tau, report.accuracy_pct);
}

void cmd_eval(const std::string& model_path, const std::string& data_path,
              double tau, const std::string& naive_path) {
  const Dataset data = read_csv_file(data_path);
  const gbdt::SavingModel model = gbdt::load_model_file(model_path);
  const std::vector<double> truths = targets_of(data);
  const std::vector<double> preds = predictions_of(model, data);

  print_report_line("overall:", eval::evaluate(preds, truths, tau));
  for (const auto& [degree, report] : eval::evaluate_per_degree(data, preds, tau)) {
    std::printf("degree %d: ", degree);
    print_report_line("", report);
  }

  if (!naive_path.empty()) {
    const baseline::NaiveModel naive = baseline::load_model_file(naive_path);
    const std::vector<double> naive_preds = predictions_of(naive, data);
    std::printf("naive comparison:\n");
    print_report_line("overall:", eval::evaluate(naive_preds, truths, tau));
    for (const auto& [degree, report] :
         eval::evaluate_per_degree(data, naive_preds, tau)) {
      std::printf("degree %d: ", degree);
      print_report_line("", report);
    }
  }
}

void cmd_sweep(const std::string& data_path, const std::string& axis_name,
               const std::vector<double>& values, const std::string& series_name,
               const std::vector<double>& series_values, double split_fraction,
               std::uint64_t seed, const HyperFlags& hyper,
               const std::string& out_path) {
  eval::SweepSpec spec;
  spec.axis = eval::axis_from_string(axis_name);
  spec.values = values;
  spec.fixed = hyper.hp;
  if (!series_name.empty()) {
    spec.series = eval::axis_from_string(series_name);
    spec.series_values = series_values;
  }

  const Dataset data = read_csv_file(data_path);
  auto [train_set, test_set] = split(data, split_fraction, seed);
  const std::vector<eval::SweepRow> rows = eval::sweep(spec, train_set, test_set);

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open '" + out_path + "' for writing");
  eval::write_sweep_csv(spec, rows, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing sweep csv '" + out_path + "'");
  std::printf("wrote %zu sweep rows to %s\n", rows.size(), out_path.c_str());
}

void cmd_simulate(const std::string& workload_path, const std::string& policy_name,
                  double threshold, const std::string& model_path, int workers,
                  const OracleFlags& oracle_flags, const std::string& trace_path) {
  const std::vector<TranscodeTask> tasks = read_workload_file(workload_path);

  sim::MergePolicy policy;
  if (policy_name == "never")
    policy = sim::MergePolicy::never();
  else if (policy_name == "always")
    policy = sim::MergePolicy::always();
  else if (policy_name == "threshold")
    policy = sim::MergePolicy::threshold(threshold);
  else
    throw CLI::ValidationError("--policy",
                               "expected 'never', 'always', or 'threshold'");

  std::optional<gbdt::SavingModel> model;
  if (!model_path.empty()) model = gbdt::load_model_file(model_path);
  if (policy.kind == sim::MergePolicy::Kind::Threshold && !model)
    throw CLI::ValidationError("--policy", "threshold policy requires --model");

  std::vector<sim::GroupTraceRow> trace;
  const sim::SimReport report =
      sim::run_sim(tasks, policy, model ? &*model : nullptr,
                   oracle_flags.resolve(), workers,
                   trace_path.empty() ? nullptr : &trace);

  std::printf("tasks: %zu\n", tasks.size());
  sim::write_report(report, std::cout);
  if (!trace_path.empty()) {
    std::ofstream out(trace_path);
    if (!out)
      throw std::runtime_error("cannot open '" + trace_path + "' for writing");
    sim::write_trace_csv(trace, out);
    out.flush();
    if (!out)
      throw std::runtime_error("failed writing trace csv '" + trace_path + "'");
    std::printf("per-group trace written to %s\n", trace_path.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execution-time saving prediction for merged transcoding tasks"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a labeled oracle dataset CSV");
  int videos = 200;
  int cases = 50;
  std::string gen_out;
  OracleFlags gen_oracle;
  gen->add_option("--videos", videos, "Number of synthetic video segments")
      ->capture_default_str();
  gen->add_option("--cases", cases, "Merge cases per segment")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output dataset CSV")->required();
  gen_oracle.attach(*gen);
  gen->callback([&] { cmd_gen(videos, cases, gen_oracle, gen_out); });

  // train
  auto* train = app.add_subcommand("train", "Train a saving predictor from a CSV");
  std::string train_data, train_out, train_kind = "gbdt", test_out;
  double train_split = 0.8;
  std::uint64_t train_seed = kDefaultSeed;
  HyperFlags train_hyper;
  train->add_option("--data", train_data, "Training dataset CSV")->required();
  train->add_option("--out", train_out, "Output model file")->required();
  train->add_option("--kind", train_kind, "Model kind: gbdt or naive")
      ->capture_default_str();
  train->add_option("--split-fraction", train_split,
                    "Train fraction; 1 disables the held-out split")
      ->capture_default_str();
  train->add_option("--seed", train_seed, "Split seed")->capture_default_str();
  train->add_option("--test-out", test_out, "Write the held-out split to a CSV");
  train_hyper.attach(*train);
  train->callback([&] {
    cmd_train(train_data, train_out, train_kind, train_split, train_seed,
              train_hyper, test_out);
  });

  // predict
  auto* predict = app.add_subcommand("predict", "Predict savings for feature rows");
  std::string predict_model, predict_features, predict_data;
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--features", predict_features,
                      "One feature row: 11 comma-separated values");
  predict->add_option("--data", predict_data,
                      "Dataset CSV; predicts every row (saving column ignored)");
  predict->callback(
      [&] { cmd_predict(predict_model, predict_features, predict_data); });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a dataset");
  std::string eval_model, eval_data, eval_naive;
  double tau = 0.12;
  eval_cmd->add_option("--model", eval_model, "GBDT model file")->required();
  eval_cmd->add_option("--data", eval_data, "Evaluation dataset CSV")->required();
  eval_cmd->add_option("--tau", tau, "Accuracy tolerance")->capture_default_str();
  eval_cmd->add_option("--naive", eval_naive,
                       "Naive model file for a side-by-side comparison");
  eval_cmd->callback([&] { cmd_eval(eval_model, eval_data, tau, eval_naive); });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweep to a CSV");
  std::string sweep_data, sweep_axis, sweep_series, sweep_out;
  std::vector<double> sweep_values, sweep_series_values;
  double sweep_split = 0.8;
  std::uint64_t sweep_seed = kDefaultSeed;
  HyperFlags sweep_hyper;
  sweep->add_option("--data", sweep_data, "Dataset CSV")->required();
  sweep->add_option("--axis", sweep_axis, "Sweep axis: M, L, D, S, or J")
      ->required();
  sweep->add_option("--values", sweep_values, "Axis values (strictly increasing)")
      ->required()
      ->delimiter(',');
  sweep->add_option("--series", sweep_series, "Optional second axis");
  sweep->add_option("--series-values", sweep_series_values, "Second-axis values")
      ->delimiter(',');
  sweep->add_option("--split-fraction", sweep_split, "Train fraction")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_seed, "Split seed")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Output sweep CSV")->required();
  sweep_hyper.attach(*sweep);
  sweep->callback([&] {
    cmd_sweep(sweep_data, sweep_axis, sweep_values, sweep_series,
              sweep_series_values, sweep_split, sweep_seed, sweep_hyper, sweep_out);
  });

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Merge-aware makespan simulation over a workload file");
  std::string sim_workload, sim_policy = "always", sim_model, sim_trace;
  double sim_threshold = 0.0;
  int workers = 1;
  OracleFlags sim_oracle;
  simulate->add_option("--workload", sim_workload, "Workload file")->required();
  simulate->add_option("--policy", sim_policy,
                       "Merge policy: never, always, or threshold")
      ->capture_default_str();
  simulate->add_option("--threshold", sim_threshold,
                       "Minimum predicted saving for the threshold policy")
      ->capture_default_str();
  simulate->add_option("--model", sim_model, "Predictor model file");
  simulate->add_option("--workers", workers, "Number of identical machines")
      ->capture_default_str();
  simulate->add_option("--trace", sim_trace, "Write a per-group trace CSV");
  sim_oracle.attach(*simulate);
  simulate->callback([&] {
    cmd_simulate(sim_workload, sim_policy, sim_threshold, sim_model, workers,
                 sim_oracle, sim_trace);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
