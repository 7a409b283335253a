#include "taskmerge/eval.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "text_util.hpp"

namespace taskmerge::eval {

namespace {

void check_lengths(std::span<const double> predictions,
                   std::span<const double> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("predictions/truths length mismatch");
  if (predictions.empty()) throw std::invalid_argument("no samples to score");
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  check_lengths(predictions, truths);
  double sse = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = predictions[i] - truths[i];
    sse += d * d;
  }
  return std::sqrt(sse / static_cast<double>(predictions.size()));
}

double accuracy(std::span<const double> predictions, std::span<const double> truths,
                double tau) {
  check_lengths(predictions, truths);
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (std::abs(predictions[i] - truths[i]) <= tau) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(predictions.size());
}

EvalReport evaluate(std::span<const double> predictions,
                    std::span<const double> truths, double tau) {
  EvalReport report;
  report.rmse = rmse(predictions, truths);
  report.accuracy_pct = accuracy(predictions, truths, tau);
  report.tau = tau;
  report.count = predictions.size();
  return report;
}

std::map<int, EvalReport> evaluate_per_degree(const Dataset& data,
                                              std::span<const double> predictions,
                                              double tau) {
  if (data.size() != predictions.size())
    throw std::invalid_argument("dataset/predictions length mismatch");
  std::map<int, std::pair<std::vector<double>, std::vector<double>>> buckets;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& [preds, truths] = buckets[data.samples[i].features.degree()];
    preds.push_back(predictions[i]);
    truths.push_back(data.samples[i].saving);
  }
  std::map<int, EvalReport> out;
  for (const auto& [degree, pt] : buckets)
    out.emplace(degree, evaluate(pt.first, pt.second, tau));
  return out;
}

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::NumTrees: return "M";
    case Axis::LearningRate: return "L";
    case Axis::MaxDepth: return "D";
    case Axis::MinSamplesSplit: return "S";
    case Axis::MinSamplesLeaf: return "J";
  }
  return "?";
}

Axis axis_from_string(std::string_view name) {
  if (name == "M") return Axis::NumTrees;
  if (name == "L") return Axis::LearningRate;
  if (name == "D") return Axis::MaxDepth;
  if (name == "S") return Axis::MinSamplesSplit;
  if (name == "J") return Axis::MinSamplesLeaf;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) +
                              "' (expected M, L, D, S, or J)");
}

namespace {

void apply(gbdt::Hyperparams& hp, Axis axis, double value) {
  switch (axis) {
    case Axis::NumTrees: hp.num_trees = static_cast<int>(value); break;
    case Axis::LearningRate: hp.learning_rate = value; break;
    case Axis::MaxDepth: hp.max_depth = static_cast<int>(value); break;
    case Axis::MinSamplesSplit: hp.min_samples_split = static_cast<int>(value); break;
    case Axis::MinSamplesLeaf: hp.min_samples_leaf = static_cast<int>(value); break;
  }
}

void check_strictly_increasing(const std::vector<double>& values,
                               std::string_view what) {
  if (values.empty())
    throw std::invalid_argument(std::string(what) + " must be non-empty");
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (!(values[i] < values[i + 1]))
      throw std::invalid_argument(std::string(what) +
                                  " must be strictly increasing");
}

std::vector<double> model_predictions(const gbdt::SavingModel& model,
                                      const Dataset& data) {
  std::vector<double> preds;
  preds.reserve(data.size());
  for (const Sample& s : data.samples) preds.push_back(model.predict(s.features));
  return preds;
}

std::vector<double> targets_of(const Dataset& data) {
  std::vector<double> t;
  t.reserve(data.size());
  for (const Sample& s : data.samples) t.push_back(s.saving);
  return t;
}

}  // namespace

void SweepSpec::validate() const {
  check_strictly_increasing(values, "sweep values");
  if (series.has_value()) {
    check_strictly_increasing(series_values, "series values");
    if (*series == axis)
      throw std::invalid_argument("series axis must differ from the sweep axis");
  } else if (!series_values.empty()) {
    throw std::invalid_argument("series_values given without a series axis");
  }
  fixed.validate();
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const Dataset& train,
                            const Dataset& test) {
  spec.validate();
  if (train.empty() || test.empty())
    throw std::invalid_argument("sweep needs non-empty train and test sets");

  const std::vector<double> train_truth = targets_of(train);
  const std::vector<double> test_truth = targets_of(test);

  // A single pass without a series axis is one run over `values`.
  std::vector<std::optional<double>> series_points;
  if (spec.series.has_value())
    for (double sv : spec.series_values) series_points.emplace_back(sv);
  else
    series_points.emplace_back(std::nullopt);

  std::vector<SweepRow> rows;
  rows.reserve(series_points.size() * spec.values.size());
  for (const auto& series_value : series_points) {
    for (double value : spec.values) {
      gbdt::Hyperparams hp = spec.fixed;
      apply(hp, spec.axis, value);
      if (series_value.has_value()) apply(hp, *spec.series, *series_value);
      try {
        const gbdt::SavingModel model = gbdt::train(train, hp);
        rows.push_back(SweepRow{
            value, series_value,
            rmse(model_predictions(model, train), train_truth),
            rmse(model_predictions(model, test), test_truth)});
      } catch (const std::exception& e) {
        throw std::runtime_error("sweep failed at " +
                                 std::string(to_string(spec.axis)) + "=" +
                                 detail::format_double(value) + ": " + e.what());
      }
    }
  }
  return rows;
}

void write_sweep_csv(const SweepSpec& spec, std::span<const SweepRow> rows,
                     std::ostream& out) {
  out << "axis,series,value,series_value,train_rmse,test_rmse\n";
  for (const SweepRow& row : rows) {
    out << to_string(spec.axis) << ','
        << (spec.series ? to_string(*spec.series) : std::string_view{}) << ','
        << detail::format_double(row.value) << ',';
    if (row.series_value) out << detail::format_double(*row.series_value);
    out << ',' << detail::format_double(row.train_rmse) << ','
        << detail::format_double(row.test_rmse) << '\n';
  }
}

}  // namespace taskmerge::eval
