#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "motifscope/dataset.hpp"

namespace motifscope {

struct TreeNode {
  std::int32_t feature = -1;  ///< -1 at leaves
  double threshold = 0;       ///< go left iff value <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> weighted;  ///< class-weighted sample counts
  std::int64_t samples = 0;      ///< raw training samples reaching the node
  double weight = 0;             ///< sum of `weighted`
  double impurity = 0;           ///< weighted Gini

  bool is_leaf() const { return feature < 0; }
  int predicted() const;
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  int min_leaf = 10;
  /// Features examined per split; 0 or >= column count means all.
  int max_features = 0;
  std::uint64_t seed = 0;
};

/// Binary classification tree over dense feature values. Node 0 is the root.
class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, int n_classes, int n_features, int min_leaf);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int n_classes() const { return n_classes_; }
  int n_features() const { return n_features_; }
  int min_leaf() const { return min_leaf_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

  /// Index of the leaf reached by a sparse row.
  std::int32_t apply(std::span<const std::uint32_t> cols, std::span<const double> vals) const;
  int predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const;

  /// Throws std::logic_error if a leaf below a split holds fewer than
  /// min_leaf raw samples.
  void check_min_leaf() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  int n_classes_ = 0;
  int n_features_ = 0;
  int min_leaf_ = 1;
};

/// Gini impurity of class-weighted counts with total `w`.
double gini(std::span<const double> weighted, double w);

/// Grows a tree on `rows` (duplicates allowed, as in a bootstrap sample).
DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> class_weights,
                      const TreeParams& params = {});

struct ForestParams {
  int n_trees = 100;
  int min_leaf = 10;
  /// 0 selects floor(sqrt(columns)); negative selects all columns.
  int max_features = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::uint64_t seed = 0;
  ForestParams params;

  int predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const;
};

/// Bootstrap sample drawn for tree `t`, exposed so callers can reproduce a
/// member tree with fit_tree.
std::vector<std::size_t> forest_bootstrap(std::span<const std::size_t> rows, std::uint64_t seed, int t);
std::uint64_t forest_tree_seed(std::uint64_t seed, int t);
int forest_max_features(const ForestParams& params, std::size_t columns);

ForestModel fit_forest(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> class_weights,
                       const ForestParams& params, std::uint64_t seed, int threads = 1);

}  // namespace motifscope
