#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "split_oracle.hpp"
#include "taskmerge/errors.hpp"
#include "taskmerge/gbdt.hpp"
#include "taskmerge/rng.hpp"

using namespace taskmerge;
using gbdt::Hyperparams;

namespace {

// Random regression problems: a few columns, some integer-valued to force
// duplicate feature values and exact gain ties.
struct Problem {
  std::vector<std::vector<double>> columns;
  std::vector<double> targets;
};

Problem random_problem(rng::SplitMix64& gen, std::size_t max_n, std::size_t max_f) {
  Problem p;
  const std::size_t n = 2 + gen.next_below(max_n - 1);
  const std::size_t f = 1 + gen.next_below(max_f);
  p.columns.resize(f);
  for (std::size_t j = 0; j < f; ++j) {
    const bool integer_valued = gen.next_below(2) == 0;
    for (std::size_t i = 0; i < n; ++i)
      p.columns[j].push_back(integer_valued
                                 ? static_cast<double>(gen.next_below(8))
                                 : gen.next_unit() * 10.0);
  }
  for (std::size_t i = 0; i < n; ++i) p.targets.push_back(gen.next_unit());
  return p;
}

Hyperparams unconstrained_stump() {
  Hyperparams hp;
  hp.num_trees = 1;
  hp.max_depth = 1;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  return hp;
}

}  // namespace

TEST_CASE("best_split: documented example finds threshold 2.5, reduction 100") {
  const std::vector<double> values = {1, 2, 3, 4};
  const std::vector<double> residuals = {0, 0, 10, 10};
  const auto split = gbdt::best_split(values, residuals, 1);
  REQUIRE(split.has_value());
  CHECK(split->threshold == 2.5);
  CHECK(split->sse_reduction == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("best_split: constant feature or constant residuals give no split") {
  const std::vector<double> constant_feature = {3, 3, 3, 3};
  const std::vector<double> residuals = {0, 1, 2, 3};
  CHECK_FALSE(gbdt::best_split(constant_feature, residuals, 1).has_value());

  const std::vector<double> values = {1, 2, 3, 4};
  const std::vector<double> constant_residuals = {0.3, 0.3, 0.3, 0.3};
  CHECK_FALSE(gbdt::best_split(values, constant_residuals, 1).has_value());
}

TEST_CASE("best_split honors the minimum leaf size") {
  const std::vector<double> values = {1, 2, 3, 4};
  const std::vector<double> residuals = {0, 0, 10, 10};
  const auto split = gbdt::best_split(values, residuals, 2);
  REQUIRE(split.has_value());
  CHECK(split->threshold == 2.5);  // 1.5 and 3.5 would starve a child
  CHECK_FALSE(gbdt::best_split(values, residuals, 3).has_value());
}

TEST_CASE("fit_tree: depth-1 stump on the documented example") {
  const std::vector<std::vector<double>> columns = {{1, 2, 3, 4}};
  const std::vector<double> residuals = {0, 0, 10, 10};
  const auto tree = gbdt::fit_tree(columns, residuals, unconstrained_stump());
  CHECK(tree.depth() == 1);
  CHECK(tree.leaf_count() == 2);
  CHECK(tree.predict(std::vector<double>{1.0}) == 0.0);
  CHECK(tree.predict(std::vector<double>{4.0}) == 10.0);
}

TEST_CASE("fit_tree: constant residuals produce a single leaf") {
  const std::vector<std::vector<double>> columns = {{1, 2, 3, 4}};
  const std::vector<double> residuals = {0.7, 0.7, 0.7, 0.7};
  const auto tree = gbdt::fit_tree(columns, residuals, unconstrained_stump());
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.predict(std::vector<double>{2.0}) == doctest::Approx(0.7));
}

TEST_CASE("fit_tree: every sample lands in exactly one leaf (property)") {
  rng::SplitMix64 gen(55);
  for (int trial = 0; trial < 50; ++trial) {
    const Problem p = random_problem(gen, 60, 3);
    Hyperparams hp;
    hp.max_depth = 1 + static_cast<int>(gen.next_below(5));
    hp.min_samples_split = 2;
    hp.min_samples_leaf = 1 + static_cast<int>(gen.next_below(2));
    std::vector<double> fitted(p.targets.size(), -1.0);
    const auto tree = gbdt::fit_tree(p.columns, p.targets, hp, fitted);
    CHECK(tree.depth() <= hp.max_depth);
    // out-predictions equal a fresh traversal for every sample
    for (std::size_t i = 0; i < p.targets.size(); ++i) {
      std::vector<double> x;
      for (const auto& col : p.columns) x.push_back(col[i]);
      CHECK(fitted[i] == tree.predict(x));
    }
  }
}

TEST_CASE("depth-1 trees match the exhaustive split oracle (spot check)") {
  rng::SplitMix64 gen(77);
  for (int trial = 0; trial < 40; ++trial) {
    const Problem p = random_problem(gen, 20, 3);
    const int min_leaf = 1 + static_cast<int>(gen.next_below(2));
    Hyperparams hp = unconstrained_stump();
    hp.min_samples_leaf = min_leaf;

    const auto tree = gbdt::fit_tree(p.columns, p.targets, hp);
    const auto brute = testing::brute_force_stump(p.columns, p.targets, min_leaf);
    if (!brute.has_value()) {
      CHECK(tree.nodes().size() == 1);
      continue;
    }
    REQUIRE(tree.nodes().size() == 3);
    const auto& root = tree.nodes()[0];
    CHECK(root.feature == brute->feature);
    CHECK(root.threshold == brute->threshold);
    CHECK(tree.nodes()[root.left].value == doctest::Approx(brute->left_mean).epsilon(1e-9));
    CHECK(tree.nodes()[root.right].value == doctest::Approx(brute->right_mean).epsilon(1e-9));
  }
}

TEST_CASE("train: zero trees give the base mean model") {
  Hyperparams hp;
  hp.num_trees = 0;
  const std::vector<std::vector<double>> columns = {{1, 2, 3}};
  const std::vector<double> targets = {0.2, 0.4, 0.9};
  const auto model = gbdt::train(columns, targets, hp);
  CHECK(model.trees().empty());
  CHECK(model.predict(std::vector<double>{5.0}) == doctest::Approx(0.5));
}

TEST_CASE("train: a single sample is predicted exactly") {
  Hyperparams hp;
  hp.num_trees = 10;
  const std::vector<std::vector<double>> columns = {{1.5}};
  const std::vector<double> targets = {0.37};
  const auto model = gbdt::train(columns, targets, hp);
  CHECK(model.predict(std::vector<double>{1.5}) == doctest::Approx(0.37));
}

TEST_CASE("train: interpolates a separable 4-sample dataset") {
  Hyperparams hp;
  hp.num_trees = 3;
  hp.learning_rate = 1.0;
  hp.max_depth = 2;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  const std::vector<std::vector<double>> columns = {{1, 2, 3, 4}};
  const std::vector<double> targets = {0.9, 0.1, 0.7, 0.3};
  gbdt::TrainTrace trace;
  gbdt::train(columns, targets, hp, &trace);
  REQUIRE(trace.train_sse.size() == 3);
  CHECK(trace.train_sse.back() == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("train: empty datasets and ragged columns are rejected") {
  Hyperparams hp;
  CHECK_THROWS_AS(gbdt::train({}, std::vector<double>{}, hp), std::invalid_argument);
  const std::vector<std::vector<double>> ragged = {{1, 2, 3}, {1, 2}};
  const std::vector<double> targets = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(gbdt::train(ragged, targets, hp), std::invalid_argument);
}

TEST_CASE("training SSE never increases (property)") {
  rng::SplitMix64 gen(99);
  for (double lr : {0.1, 1.0}) {
    const Problem p = random_problem(gen, 80, 3);
    Hyperparams hp;
    hp.num_trees = 60;
    hp.learning_rate = lr;
    hp.max_depth = 3;
    hp.min_samples_split = 2;
    hp.min_samples_leaf = 1;
    gbdt::TrainTrace trace;
    gbdt::train(p.columns, p.targets, hp, &trace);
    for (std::size_t m = 1; m < trace.train_sse.size(); ++m)
      CHECK(trace.train_sse[m] <= trace.train_sse[m - 1] * (1.0 + 1e-12) + 1e-15);
  }
}

TEST_CASE("train predictions stay within the target range (property)") {
  rng::SplitMix64 gen(123);
  const Problem p = random_problem(gen, 100, 3);
  const auto [lo, hi] = std::minmax_element(p.targets.begin(), p.targets.end());
  Hyperparams hp;
  hp.num_trees = 80;
  hp.max_depth = 4;
  hp.min_samples_split = 4;
  hp.min_samples_leaf = 1;
  const auto model = gbdt::train(p.columns, p.targets, hp);
  for (std::size_t i = 0; i < p.targets.size(); ++i) {
    std::vector<double> x;
    for (const auto& col : p.columns) x.push_back(col[i]);
    const double prediction = model.predict(x);
    CHECK(prediction >= *lo - 1e-12);
    CHECK(prediction <= *hi + 1e-12);
  }
}

TEST_CASE("predict validates the feature dimension") {
  Hyperparams hp;
  hp.num_trees = 2;
  const std::vector<std::vector<double>> columns = {{1, 2, 3, 4}, {4, 3, 2, 1}};
  const std::vector<double> targets = {0.1, 0.2, 0.3, 0.4};
  const auto model = gbdt::train(columns, targets, hp);
  CHECK_THROWS_AS(model.predict(std::vector<double>{1.0}), std::invalid_argument);
  CHECK_NOTHROW(model.predict(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("model serialization round-trips predictions bit-exactly") {
  rng::SplitMix64 gen(31);
  const Problem p = random_problem(gen, 120, 3);
  Hyperparams hp;
  hp.num_trees = 25;
  hp.max_depth = 5;
  hp.min_samples_split = 4;
  hp.min_samples_leaf = 2;
  const auto model = gbdt::train(p.columns, p.targets, hp);

  std::stringstream io;
  gbdt::save_model(model, io);
  const auto loaded = gbdt::load_model(io);

  CHECK(loaded.feature_count() == model.feature_count());
  CHECK(loaded.base_prediction() == model.base_prediction());
  CHECK(loaded.trees().size() == model.trees().size());
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x;
    for (std::size_t f = 0; f < p.columns.size(); ++f)
      x.push_back(gen.next_unit() * 12.0 - 1.0);
    CHECK(model.predict(x) == loaded.predict(x));
  }
}

TEST_CASE("an empty-ensemble model round-trips") {
  Hyperparams hp;
  hp.num_trees = 0;
  const auto model =
      gbdt::train({{1.0, 2.0}}, std::vector<double>{0.25, 0.75}, hp);
  std::stringstream io;
  gbdt::save_model(model, io);
  const auto loaded = gbdt::load_model(io);
  CHECK(loaded.predict(std::vector<double>{3.0}) == model.predict(std::vector<double>{3.0}));
}

TEST_CASE("model loader rejects broken files") {
  const std::vector<std::vector<double>> columns = {{1, 2, 3, 4}};
  const std::vector<double> targets = {0.1, 0.9, 0.2, 0.8};
  Hyperparams hp;
  hp.num_trees = 3;
  hp.min_samples_split = 2;
  hp.min_samples_leaf = 1;
  hp.max_depth = 2;
  const auto model = gbdt::train(columns, targets, hp);
  std::stringstream io;
  gbdt::save_model(model, io);
  const std::string text = io.str();

  // truncation anywhere in the tree body
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(gbdt::load_model(truncated), ParseError);

  // version mismatch
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find("v1"), 2, "v9");
  std::stringstream version_stream(wrong_version);
  CHECK_THROWS_AS(gbdt::load_model(version_stream), ParseError);

  // kind mismatch
  std::string wrong_kind = text;
  wrong_kind.replace(wrong_kind.find("kind gbdt"), 9, "kind nope");
  std::stringstream kind_stream(wrong_kind);
  CHECK_THROWS_AS(gbdt::load_model(kind_stream), ParseError);

  // corrupted node line
  std::string corrupt = text;
  corrupt.replace(corrupt.find("\nL "), 3, "\nQ ");
  std::stringstream corrupt_stream(corrupt);
  CHECK_THROWS_AS(gbdt::load_model(corrupt_stream), ParseError);
}

TEST_CASE("hyperparameter validation") {
  Hyperparams hp;
  hp.learning_rate = 0.0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.learning_rate = 1.5;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.max_depth = 0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.min_samples_split = 1;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  hp = Hyperparams{};
  hp.min_samples_leaf = 0;
  CHECK_THROWS_AS(hp.validate(), std::invalid_argument);
  CHECK_NOTHROW(Hyperparams{}.validate());
}

TEST_CASE("default hyperparameters follow the tuned configuration") {
  const Hyperparams hp;
  CHECK(hp.num_trees == 350);
  CHECK(hp.learning_rate == 0.1);
  CHECK(hp.max_depth == 11);
  CHECK(hp.min_samples_split == 30);
  CHECK(hp.min_samples_leaf == 2);
}
