#include "taskmerge/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "taskmerge/errors.hpp"
#include "taskmerge/model_file.hpp"
#include "text_util.hpp"

namespace taskmerge::gbdt {

void Hyperparams::validate() const {
  if (num_trees < 0) throw std::invalid_argument("num_trees must be >= 0");
  if (!(learning_rate > 0.0) || learning_rate > 1.0)
    throw std::invalid_argument("learning_rate must be in (0, 1]");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (min_samples_split < 2)
    throw std::invalid_argument("min_samples_split must be >= 2");
  if (min_samples_leaf < 1)
    throw std::invalid_argument("min_samples_leaf must be >= 1");
}

namespace {

// Threshold scan over samples already sorted by feature value. `value(i)`
// and `residual(i)` address the i-th sample in sorted order. Candidates are
// midpoints between consecutive distinct values; ties keep the lowest
// threshold because only strict improvements replace the incumbent.
template <typename ValueFn, typename ResidualFn>
std::optional<SplitCandidate> scan_sorted(std::size_t n, ValueFn value,
                                          ResidualFn residual, int min_leaf) {
  if (n < 2 * static_cast<std::size_t>(min_leaf) || n < 2) return std::nullopt;

  double total_sum = 0.0;
  bool constant_residuals = true;
  for (std::size_t i = 0; i < n; ++i) {
    total_sum += residual(i);
    constant_residuals = constant_residuals && residual(i) == residual(0);
  }
  // A constant residual vector admits no SSE improvement; bail out before
  // floating-point rounding can manufacture a spurious one.
  if (constant_residuals) return std::nullopt;

  std::optional<SplitCandidate> best;
  double best_reduction = 0.0;
  double left_sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_sum += residual(i);
    const double v = value(i);
    const double v_next = value(i + 1);
    if (!(v_next > v)) continue;  // duplicate value, no boundary here

    const std::size_t left_n = i + 1;
    const std::size_t right_n = n - left_n;
    if (left_n < static_cast<std::size_t>(min_leaf) ||
        right_n < static_cast<std::size_t>(min_leaf))
      continue;

    const double threshold = (v + v_next) * 0.5;
    if (!(threshold < v_next)) continue;  // adjacent doubles, cannot separate

    const double mean_left = left_sum / static_cast<double>(left_n);
    const double mean_right =
        (total_sum - left_sum) / static_cast<double>(right_n);
    const double diff = mean_left - mean_right;
    const double reduction = diff * diff * static_cast<double>(left_n) *
                             static_cast<double>(right_n) /
                             static_cast<double>(n);
    if (reduction > best_reduction) {
      best_reduction = reduction;
      best = SplitCandidate{threshold, reduction};
    }
  }
  return best;
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const double> values,
                                         std::span<const double> residuals,
                                         int min_samples_leaf) {
  if (values.size() != residuals.size())
    throw std::invalid_argument("values/residuals length mismatch");
  if (min_samples_leaf < 1)
    throw std::invalid_argument("min_samples_leaf must be >= 1");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  return scan_sorted(
      order.size(), [&](std::size_t i) { return values[order[i]]; },
      [&](std::size_t i) { return residuals[order[i]]; }, min_samples_leaf);
}

RegressionTree::RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("tree needs at least one node");
  const int n = static_cast<int>(nodes_.size());
  for (int i = 0; i < n; ++i) {
    const Node& node = nodes_[i];
    if (node.is_leaf()) continue;
    if (node.left <= i || node.left >= n || node.right <= i || node.right >= n)
      throw std::invalid_argument("tree node has out-of-range children");
  }
}

double RegressionTree::predict(std::span<const double> x) const {
  const Node* node = &nodes_[0];
  while (!node->is_leaf()) {
    node = &nodes_[x[static_cast<std::size_t>(node->feature)] <= node->threshold
                       ? node->left
                       : node->right];
  }
  return node->value;
}

int RegressionTree::depth() const {
  int max_depth = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};  // node, depth
  while (!stack.empty()) {
    auto [index, d] = stack.back();
    stack.pop_back();
    max_depth = std::max(max_depth, d);
    const Node& node = nodes_[static_cast<std::size_t>(index)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return max_depth;
}

std::size_t RegressionTree::leaf_count() const {
  std::size_t count = 0;
  for (const Node& node : nodes_)
    if (node.is_leaf()) ++count;
  return count;
}

namespace {

// Recursive builder over per-feature sorted index lists. Splitting a node
// partitions each list stably, so children stay sorted without re-sorting.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& columns,
              std::span<const double> residuals, const Hyperparams& hp,
              std::span<double> out_predictions)
      : columns_(columns),
        residuals_(residuals),
        hp_(hp),
        out_predictions_(out_predictions),
        goes_left_(residuals.size(), 0) {}

  RegressionTree build() {
    std::vector<std::vector<std::uint32_t>> order(columns_.size());
    for (std::size_t f = 0; f < columns_.size(); ++f) {
      order[f].resize(residuals_.size());
      std::iota(order[f].begin(), order[f].end(), 0u);
      const std::vector<double>& col = columns_[f];
      std::stable_sort(order[f].begin(), order[f].end(),
                       [&](std::uint32_t a, std::uint32_t b) {
                         return col[a] < col[b];
                       });
    }
    if (columns_.empty()) {
      // No features: a single index list is still needed to reach samples.
      order.emplace_back(residuals_.size());
      std::iota(order.back().begin(), order.back().end(), 0u);
      no_features_ = true;
    }
    build_node(std::move(order), 0);
    return RegressionTree(std::move(nodes_));
  }

 private:
  struct BestSplit {
    int feature = -1;
    double threshold = 0.0;
    double reduction = 0.0;
  };

  int build_node(std::vector<std::vector<std::uint32_t>> order, int depth) {
    const std::vector<std::uint32_t>& samples = order.front();
    const std::size_t n = samples.size();

    double sum = 0.0;
    for (std::uint32_t idx : samples) sum += residuals_[idx];
    const double mean = sum / static_cast<double>(n);

    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    BestSplit best;
    const bool may_split =
        !no_features_ && depth < hp_.max_depth &&
        n >= static_cast<std::size_t>(hp_.min_samples_split);
    if (may_split) {
      for (std::size_t f = 0; f < columns_.size(); ++f) {
        const std::vector<double>& col = columns_[f];
        const std::vector<std::uint32_t>& idx = order[f];
        auto candidate = scan_sorted(
            n, [&](std::size_t i) { return col[idx[i]]; },
            [&](std::size_t i) { return residuals_[idx[i]]; },
            hp_.min_samples_leaf);
        if (candidate && candidate->sse_reduction > best.reduction) {
          best = BestSplit{static_cast<int>(f), candidate->threshold,
                           candidate->sse_reduction};
        }
      }
    }

    if (best.feature < 0) {
      nodes_[index].value = mean;
      if (!out_predictions_.empty())
        for (std::uint32_t idx : samples) out_predictions_[idx] = mean;
      return index;
    }

    const std::vector<double>& split_col = columns_[static_cast<std::size_t>(best.feature)];
    std::size_t left_n = 0;
    for (std::uint32_t idx : samples) {
      goes_left_[idx] = split_col[idx] <= best.threshold;
      left_n += goes_left_[idx] ? 1u : 0u;
    }

    std::vector<std::vector<std::uint32_t>> left_order(order.size());
    std::vector<std::vector<std::uint32_t>> right_order(order.size());
    for (std::size_t f = 0; f < order.size(); ++f) {
      left_order[f].reserve(left_n);
      right_order[f].reserve(n - left_n);
      for (std::uint32_t idx : order[f])
        (goes_left_[idx] ? left_order[f] : right_order[f]).push_back(idx);
    }
    order.clear();

    const int left = build_node(std::move(left_order), depth + 1);
    const int right = build_node(std::move(right_order), depth + 1);
    nodes_[index].feature = best.feature;
    nodes_[index].threshold = best.threshold;
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
  }

  const std::vector<std::vector<double>>& columns_;
  std::span<const double> residuals_;
  const Hyperparams& hp_;
  std::span<double> out_predictions_;
  std::vector<char> goes_left_;
  bool no_features_ = false;
  std::vector<RegressionTree::Node> nodes_;
};

void check_columns(const std::vector<std::vector<double>>& columns,
                   std::size_t n_samples) {
  for (const std::vector<double>& col : columns)
    if (col.size() != n_samples)
      throw std::invalid_argument("feature column length mismatch");
}

}  // namespace

RegressionTree fit_tree(const std::vector<std::vector<double>>& columns,
                        std::span<const double> residuals, const Hyperparams& hp,
                        std::span<double> out_predictions) {
  hp.validate();
  if (residuals.empty())
    throw std::invalid_argument("cannot fit a tree to zero samples");
  check_columns(columns, residuals.size());
  if (!out_predictions.empty() && out_predictions.size() != residuals.size())
    throw std::invalid_argument("out_predictions length mismatch");
  return TreeBuilder(columns, residuals, hp, out_predictions).build();
}

SavingModel::SavingModel(double base_prediction, Hyperparams hp, int feature_count,
                         std::vector<RegressionTree> trees)
    : base_prediction_(base_prediction),
      hp_(hp),
      feature_count_(feature_count),
      trees_(std::move(trees)) {}

double SavingModel::predict(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(feature_count_))
    throw std::invalid_argument("feature dimension mismatch: model expects " +
                                std::to_string(feature_count_) + ", got " +
                                std::to_string(x.size()));
  double sum = 0.0;
  for (const RegressionTree& tree : trees_) sum += tree.predict(x);
  return base_prediction_ + hp_.learning_rate * sum;
}

double SavingModel::predict(const FeatureVector& x) const {
  const auto array = x.as_array();
  return predict(std::span<const double>(array));
}

SavingModel train(const std::vector<std::vector<double>>& columns,
                  std::span<const double> targets, const Hyperparams& hp,
                  TrainTrace* trace) {
  hp.validate();
  const std::size_t n = targets.size();
  if (n == 0) throw std::invalid_argument("cannot train on an empty dataset");
  check_columns(columns, n);

  double base = 0.0;
  for (double y : targets) base += y;
  base /= static_cast<double>(n);

  std::vector<double> predictions(n, base);
  std::vector<double> residuals(n);
  std::vector<double> tree_predictions(n);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(hp.num_trees));

  for (int m = 0; m < hp.num_trees; ++m) {
    for (std::size_t i = 0; i < n; ++i) residuals[i] = targets[i] - predictions[i];
    trees.push_back(fit_tree(columns, residuals, hp, tree_predictions));
    for (std::size_t i = 0; i < n; ++i)
      predictions[i] += hp.learning_rate * tree_predictions[i];
    if (trace) {
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = targets[i] - predictions[i];
        sse += d * d;
      }
      trace->train_sse.push_back(sse);
    }
  }
  return SavingModel(base, hp, static_cast<int>(columns.size()), std::move(trees));
}

SavingModel train(const Dataset& train_set, const Hyperparams& hp,
                  TrainTrace* trace) {
  if (train_set.empty())
    throw std::invalid_argument("cannot train on an empty dataset");
  const std::size_t n = train_set.size();
  std::vector<std::vector<double>> columns(FeatureVector::kFeatureCount,
                                           std::vector<double>(n));
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train_set.samples[i].features.as_array();
    for (int f = 0; f < FeatureVector::kFeatureCount; ++f)
      columns[static_cast<std::size_t>(f)][i] = row[static_cast<std::size_t>(f)];
    targets[i] = train_set.samples[i].saving;
  }
  return train(columns, targets, hp, trace);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

void write_subtree(const RegressionTree& tree, int index, std::ostream& out) {
  const RegressionTree::Node& node = tree.nodes()[static_cast<std::size_t>(index)];
  if (node.is_leaf()) {
    out << "L " << detail::format_double(node.value) << '\n';
  } else {
    out << "I " << node.feature << ' ' << detail::format_double(node.threshold)
        << '\n';
    write_subtree(tree, node.left, out);
    write_subtree(tree, node.right, out);
  }
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string_view next_line() {
    if (!std::getline(in_, line_))
      throw ParseError("truncated model file", line_no_ + 1);
    ++line_no_;
    return detail::trim(line_);
  }

  std::size_t line_no() const { return line_no_; }

  void expect_field(std::string_view key, std::string& value_out) {
    std::string_view line = next_line();
    if (!line.starts_with(key) || line.size() <= key.size() ||
        line[key.size()] != ' ')
      throw ParseError("expected '" + std::string(key) + " <value>'", line_no_);
    value_out = std::string(detail::trim(line.substr(key.size() + 1)));
  }

  double expect_double(std::string_view key) {
    std::string value;
    expect_field(key, value);
    return detail::parse_double(value, key, line_no_);
  }

  long long expect_int(std::string_view key) {
    std::string value;
    expect_field(key, value);
    return detail::parse_int(value, key, line_no_);
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

// Pre-order: an internal-node line is followed by its left then its right
// subtree. Children end up at known indices because the traversal order
// matches the storage order.
int read_subtree(ModelReader& reader, std::vector<RegressionTree::Node>& nodes,
                 int feature_count, int depth) {
  if (depth > 512) throw ParseError("tree nesting too deep", reader.line_no());
  const std::string line{reader.next_line()};
  const auto fields = detail::split_fields(line, ' ');
  const int index = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (fields.size() == 2 && fields[0] == "L") {
    nodes[static_cast<std::size_t>(index)].value =
        detail::parse_double(fields[1], "leaf value", reader.line_no());
    return index;
  }
  if (fields.size() == 3 && fields[0] == "I") {
    const long long feature = detail::parse_int(fields[1], "feature index", reader.line_no());
    if (feature < 0 || feature >= feature_count)
      throw ParseError("feature index out of range", reader.line_no());
    const double threshold =
        detail::parse_double(fields[2], "threshold", reader.line_no());
    const int left = read_subtree(reader, nodes, feature_count, depth + 1);
    const int right = read_subtree(reader, nodes, feature_count, depth + 1);
    RegressionTree::Node& node = nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(feature);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    return index;
  }
  throw ParseError("expected 'I <feature> <threshold>' or 'L <value>'",
                   reader.line_no());
}

}  // namespace

void save_model(const SavingModel& model, std::ostream& out) {
  const Hyperparams& hp = model.hyperparams();
  out << kModelFileMagic << '\n'
      << "kind gbdt\n"
      << "feature_count " << model.feature_count() << '\n'
      << "num_trees " << model.trees().size() << '\n'
      << "learning_rate " << detail::format_double(hp.learning_rate) << '\n'
      << "max_depth " << hp.max_depth << '\n'
      << "min_samples_split " << hp.min_samples_split << '\n'
      << "min_samples_leaf " << hp.min_samples_leaf << '\n'
      << "base_prediction " << detail::format_double(model.base_prediction())
      << '\n';
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    out << "tree " << t << '\n';
    write_subtree(model.trees()[t], 0, out);
  }
  out << "end\n";
}

void save_model_file(const SavingModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_model(model, out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing model file '" + path + "'");
}

SavingModel load_model(std::istream& in) {
  ModelReader reader(in);
  if (reader.next_line() != kModelFileMagic)
    throw ParseError("not a " + std::string(kModelFileMagic) + " file (version mismatch?)",
                     reader.line_no());
  if (reader.next_line() != "kind gbdt")
    throw ParseError("model kind mismatch: expected 'kind gbdt'", reader.line_no());

  const long long feature_count = reader.expect_int("feature_count");
  const long long num_trees = reader.expect_int("num_trees");
  Hyperparams hp;
  hp.learning_rate = reader.expect_double("learning_rate");
  hp.max_depth = static_cast<int>(reader.expect_int("max_depth"));
  hp.min_samples_split = static_cast<int>(reader.expect_int("min_samples_split"));
  hp.min_samples_leaf = static_cast<int>(reader.expect_int("min_samples_leaf"));
  const double base = reader.expect_double("base_prediction");
  if (feature_count < 0 || feature_count > (1 << 20))
    throw ParseError("implausible feature_count", reader.line_no());
  if (num_trees < 0)
    throw ParseError("negative num_trees", reader.line_no());
  hp.num_trees = static_cast<int>(num_trees);
  hp.validate();

  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(num_trees));
  for (long long t = 0; t < num_trees; ++t) {
    const std::string header{reader.next_line()};
    if (header != "tree " + std::to_string(t))
      throw ParseError("expected 'tree " + std::to_string(t) + "'",
                       reader.line_no());
    std::vector<RegressionTree::Node> nodes;
    read_subtree(reader, nodes, static_cast<int>(feature_count), 0);
    trees.emplace_back(std::move(nodes));
  }
  if (reader.next_line() != "end")
    throw ParseError("expected 'end'", reader.line_no());
  return SavingModel(base, hp, static_cast<int>(feature_count), std::move(trees));
}

SavingModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace taskmerge::gbdt
