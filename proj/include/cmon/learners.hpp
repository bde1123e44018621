#pragma once

// Supervised binary classifiers written from scratch: logistic regression,
// CART decision tree, random forest, discrete AdaBoost on stumps and k-NN.
// Every model exposes a continuous score (higher = more likely fault) for ROC
// analysis and a hard prediction.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cmon/label.hpp"
#include "cmon/matrix.hpp"

namespace cmon {

// ---- logistic regression --------------------------------------------------

struct LogRegParams {
  double learning_rate = 0.1;
  std::size_t iterations = 2000;
  double l2 = 1e-4;
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 where a feature is constant

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  std::vector<double> apply(std::span<const double> row) const;
};

struct LogisticModel {
  Standardizer standardizer;
  std::vector<double> weights;
  double bias = 0.0;
  LogRegParams params;

  double score(std::span<const double> x) const;  // P(fault)
  Label predict(std::span<const double> x) const { return to_label(score(x) > 0.5); }
};

LogisticModel fit_logreg(const Matrix& x, std::span<const Label> y, const LogRegParams& params = {});

// Mean log-loss plus (l2 / 2)|w|^2 on standardized inputs z; theta = (w..., bias).
double logreg_objective(std::span<const double> theta, const Matrix& z, std::span<const Label> y, double l2);
std::vector<double> logreg_gradient(std::span<const double> theta, const Matrix& z, std::span<const Label> y,
                                    double l2);

// ---- decision tree --------------------------------------------------------

struct TreeParams {
  std::size_t max_depth = 0;     // 0 = unbounded
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // features drawn per split; 0 = all
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::uint32_t left = 0;   // taken when x[feature] <= threshold
  std::uint32_t right = 0;
  Label label = Label::normal;
  double fault_fraction = 0.0;
  std::size_t samples = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root is nodes[0]

  const TreeNode& leaf_for(std::span<const double> x) const;
  double score(std::span<const double> x) const { return leaf_for(x).fault_fraction; }
  Label predict(std::span<const double> x) const { return leaf_for(x).label; }
  std::size_t depth() const;
};

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
};

// Gini-optimal split of `rows` over `features` (thresholds at midpoints of
// adjacent distinct values). Ties prefer the lower feature, then the lower
// threshold. Returns nothing when no split leaves min_leaf rows on both sides.
std::optional<Split> best_gini_split(const Matrix& x, std::span<const Label> y, std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features, std::size_t min_leaf);

DecisionTree fit_dtree(const Matrix& x, std::span<const Label> y, const TreeParams& params = {});

// Grows a tree on `rows` (duplicates allowed, e.g. a bootstrap sample). The
// generator is used only when params.max_features selects a feature subset.
DecisionTree grow_tree(const Matrix& x, std::span<const Label> y, std::vector<std::size_t> rows,
                       const TreeParams& params, std::mt19937_64& rng);

// ---- random forest --------------------------------------------------------

struct ForestParams {
  std::size_t n_trees = 100;
  TreeParams tree{0, 1, 0};  // max_features 0 here means floor(sqrt(F))
  bool bootstrap = true;
  std::uint64_t seed = 17;
};

struct RandomForest {
  std::vector<DecisionTree> trees;

  double score(std::span<const double> x) const;  // fraction of trees voting fault
  Label predict(std::span<const double> x) const;  // strict majority, tie -> normal
};

RandomForest fit_rforest(const Matrix& x, std::span<const Label> y, const ForestParams& params = {});

// ---- AdaBoost -------------------------------------------------------------

struct Stump {
  std::size_t feature = 0;
  double threshold = 0.0;
  int polarity = 1;  // h(x) = polarity if x[feature] > threshold, else -polarity
  double alpha = 0.0;

  int vote(std::span<const double> x) const { return x[feature] > threshold ? polarity : -polarity; }
};

struct BoostRound {
  double weighted_error = 0.0;
  double alpha = 0.0;
  double training_error = 0.0;  // of the ensemble after this round
  double exp_loss = 0.0;        // mean exp(-y F(x)) after this round
  std::vector<double> sample_weights;  // normalized weights after reweighting
};

struct AdaBoostParams {
  std::size_t rounds = 100;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<BoostRound> history;

  double score(std::span<const double> x) const;
  Label predict(std::span<const double> x) const { return to_label(score(x) > 0.0); }
};

// Weighted-error-optimal stump; ties prefer lower feature, lower threshold, polarity +1.
std::optional<Stump> best_stump(const Matrix& x, std::span<const Label> y, std::span<const double> weights,
                                double* weighted_error);

AdaBoostModel fit_adaboost(const Matrix& x, std::span<const Label> y, const AdaBoostParams& params = {});

// ---- k nearest neighbours -------------------------------------------------

struct KnnModel {
  Matrix x;
  std::vector<Label> y;
  std::size_t k = 5;

  // Indices of the k nearest stored items; distance ties go to the smaller index.
  std::vector<std::size_t> neighbours(std::span<const double> q) const;
  double score(std::span<const double> q) const;  // fraction of fault neighbours
  Label predict(std::span<const double> q) const;  // strict majority, tie -> normal
};

KnnModel fit_knn(const Matrix& x, std::span<const Label> y, std::size_t k = 5);

// ---- type-erased model and persistence ------------------------------------

using Model = std::variant<LogisticModel, DecisionTree, RandomForest, AdaBoostModel, KnnModel>;

std::string model_kind(const Model& m);
double score(const Model& m, std::span<const double> x);
Label predict(const Model& m, std::span<const double> x);

nlohmann::json model_to_json(const Model& m);
Model model_from_json(const nlohmann::json& j);

}  // namespace cmon
