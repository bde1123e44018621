#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmon/hash.hpp"
#include "cmon/learners.hpp"

namespace cmon {
namespace {

__extension__ using i128 = __int128;

// Gini gain numerator/denominator: maximizing (a^2 + b^2) / nl + (c^2 + d^2) / nr
// minimizes weighted child impurity. Kept as an exact fraction so that ties are exact.
struct SplitScore {
  i128 num = 0;
  i128 den = 1;

  bool better_than(const SplitScore& o) const { return num * o.den > o.num * den; }
};

SplitScore score_of(std::int64_t l_normal, std::int64_t l_fault, std::int64_t r_normal, std::int64_t r_fault) {
  const i128 nl = l_normal + l_fault, nr = r_normal + r_fault;
  const i128 sl = i128(l_normal) * l_normal + i128(l_fault) * l_fault;
  const i128 sr = i128(r_normal) * r_normal + i128(r_fault) * r_fault;
  return {sl * nr + sr * nl, nl * nr};
}

double midpoint(double a, double b) {
  const double m = 0.5 * (a + b);
  return m < b ? m : a;  // keep a <= m < b so that <= separates the two values
}

TreeNode make_leaf(std::span<const Label> y, std::span<const std::size_t> rows) {
  TreeNode leaf;
  std::size_t faults = 0;
  for (std::size_t r : rows) faults += is_fault(y[r]);
  leaf.samples = rows.size();
  leaf.fault_fraction = rows.empty() ? 0.0 : static_cast<double>(faults) / static_cast<double>(rows.size());
  leaf.label = to_label(2 * faults > rows.size());  // tie -> normal
  return leaf;
}

}  // namespace

std::optional<Split> best_gini_split(const Matrix& x, std::span<const Label> y, std::span<const std::size_t> rows,
                                     std::span<const std::size_t> features, std::size_t min_leaf) {
  std::vector<std::size_t> feats(features.begin(), features.end());
  std::sort(feats.begin(), feats.end());
  std::int64_t total_fault = 0;
  for (std::size_t r : rows) total_fault += is_fault(y[r]);
  const auto n = static_cast<std::int64_t>(rows.size());
  const std::int64_t total_normal = n - total_fault;
  const auto leaf = static_cast<std::int64_t>(std::max<std::size_t>(min_leaf, 1));

  std::optional<Split> best;
  SplitScore best_score;
  std::vector<std::size_t> order(rows.begin(), rows.end());
  for (std::size_t f : feats) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
    std::int64_t l_fault = 0, l_normal = 0;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
      ++(is_fault(y[order[i]]) ? l_fault : l_normal);
      const double v = x(order[i], f), next = x(order[i + 1], f);
      if (!(v < next)) continue;
      const std::int64_t nl = i + 1;
      if (nl < leaf || n - nl < leaf) continue;
      const SplitScore s = score_of(l_normal, l_fault, total_normal - l_normal, total_fault - l_fault);
      if (!best || s.better_than(best_score)) {
        best = Split{f, midpoint(v, next)};
        best_score = s;
      }
    }
  }
  return best;
}

DecisionTree grow_tree(const Matrix& x, std::span<const Label> y, std::vector<std::size_t> rows,
                       const TreeParams& params, std::mt19937_64& rng) {
  require(!rows.empty(), "cannot grow a tree on zero rows");
  DecisionTree tree;
  std::vector<std::size_t> all_features(x.cols());
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});
  const std::size_t n_feat =
      params.max_features == 0 ? x.cols() : std::min(params.max_features, x.cols());

  struct Task {
    std::uint32_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  std::vector<Task> stack;
  tree.nodes.push_back(make_leaf(y, rows));
  stack.push_back({0, std::move(rows), 0});
  std::vector<std::size_t> candidates = all_features;

  while (!stack.empty()) {
    Task task = std::move(stack.back());
    stack.pop_back();
    const TreeNode& here = tree.nodes[task.node];
    const bool pure = here.fault_fraction == 0.0 || here.fault_fraction == 1.0;
    if (pure || (params.max_depth != 0 && task.depth >= params.max_depth)) continue;

    std::span<const std::size_t> feats = all_features;
    if (n_feat < x.cols()) {
      // partial Fisher-Yates: first n_feat entries become the sampled subset
      candidates = all_features;
      for (std::size_t i = 0; i < n_feat; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[pick(rng)]);
      }
      feats = std::span<const std::size_t>(candidates.data(), n_feat);
    }
    const auto split = best_gini_split(x, y, task.rows, feats, params.min_leaf);
    if (!split) continue;

    std::vector<std::size_t> left, right;
    for (std::size_t r : task.rows) (x(r, split->feature) <= split->threshold ? left : right).push_back(r);
    const auto l_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back(make_leaf(y, left));
    tree.nodes.push_back(make_leaf(y, right));
    TreeNode& node = tree.nodes[task.node];
    node.feature = static_cast<int>(split->feature);
    node.threshold = split->threshold;
    node.left = l_id;
    node.right = l_id + 1;
    // right pushed first so the left subtree is expanded first
    stack.push_back({l_id + 1, std::move(right), task.depth + 1});
    stack.push_back({l_id, std::move(left), task.depth + 1});
  }
  return tree;
}

DecisionTree fit_dtree(const Matrix& x, std::span<const Label> y, const TreeParams& params) {
  require(x.rows() == y.size() && !x.empty(), "dtree: features and labels must align and be nonempty");
  std::vector<std::size_t> rows(x.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::mt19937_64 rng(0);
  return grow_tree(x, y, std::move(rows), params, rng);
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (node->feature >= 0) {
    node = &nodes[x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right];
  }
  return *node;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    if (nodes[id].feature >= 0) {
      stack.push_back({nodes[id].left, d + 1});
      stack.push_back({nodes[id].right, d + 1});
    }
  }
  return best;
}

RandomForest fit_rforest(const Matrix& x, std::span<const Label> y, const ForestParams& params) {
  require(x.rows() == y.size() && !x.empty(), "rforest: features and labels must align and be nonempty");
  require(params.n_trees >= 1, "rforest: need at least one tree");
  TreeParams tp = params.tree;
  if (tp.max_features == 0) {
    tp.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x.cols()))));
  }
  RandomForest forest;
  forest.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    std::mt19937_64 rng(mix_seed(params.seed, t));
    std::vector<std::size_t> rows(x.rows());
    if (params.bootstrap) {
      std::uniform_int_distribution<std::size_t> pick(0, x.rows() - 1);
      for (auto& r : rows) r = pick(rng);
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees.push_back(grow_tree(x, y, std::move(rows), tp, rng));
  }
  return forest;
}

double RandomForest::score(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += is_fault(t.predict(x));
  return static_cast<double>(votes) / static_cast<double>(trees.size());
}

Label RandomForest::predict(std::span<const double> x) const {
  std::size_t votes = 0;
  for (const auto& t : trees) votes += is_fault(t.predict(x));
  return to_label(2 * votes > trees.size());
}

}  // namespace cmon
