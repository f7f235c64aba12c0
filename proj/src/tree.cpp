#include "motifscope/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "motifscope/util.hpp"

namespace motifscope {

int TreeNode::predicted() const {
  return static_cast<int>(std::max_element(weighted.begin(), weighted.end()) - weighted.begin());
}

double gini(std::span<const double> weighted, double w) {
  if (w <= 0) return 0;
  double sq = 0;
  for (double c : weighted) sq += c * c;
  return std::max(0.0, 1.0 - sq / (w * w));
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, int n_classes, int n_features, int min_leaf)
    : nodes_(std::move(nodes)), n_classes_(n_classes), n_features_(n_features), min_leaf_(min_leaf) {}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack = {{0, 0}};
  std::size_t best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.is_leaf()) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

namespace {

double sparse_value(std::span<const std::uint32_t> cols, std::span<const double> vals, std::uint32_t f) {
  auto it = std::lower_bound(cols.begin(), cols.end(), f);
  if (it == cols.end() || *it != f) return 0.0;
  return vals[static_cast<std::size_t>(it - cols.begin())];
}

}  // namespace

std::int32_t DecisionTree::apply(std::span<const std::uint32_t> cols, std::span<const double> vals) const {
  std::int32_t id = 0;
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    id = sparse_value(cols, vals, static_cast<std::uint32_t>(n.feature)) <= n.threshold ? n.left : n.right;
  }
  return id;
}

int DecisionTree::predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const {
  return nodes_[static_cast<std::size_t>(apply(cols, vals))].predicted();
}

void DecisionTree::check_min_leaf() const {
  if (nodes_.size() <= 1) return;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf() && nodes_[i].samples < min_leaf_) {
      throw std::logic_error("tree leaf " + std::to_string(i) + " holds " + std::to_string(nodes_[i].samples) +
                             " samples, below min_leaf " + std::to_string(min_leaf_));
    }
  }
}

namespace {

struct SplitChoice {
  std::int32_t feature = -1;
  double threshold = 0;
  double cost = 0;  // WL*giniL + WR*giniR
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> class_weights,
              const TreeParams& params)
      : cols_(data.columns()),
        n_(rows.size()),
        k_(static_cast<std::size_t>(data.n_classes())),
        f_(data.cols()),
        params_(params),
        rng_(params.seed) {
    rows_.assign(rows.begin(), rows.end());
    y_.resize(n_);
    w_.resize(n_);
    for (std::size_t p = 0; p < n_; ++p) {
      y_[p] = static_cast<std::uint32_t>(data.labels()[rows_[p]]);
      w_[p] = class_weights[y_[p]];
    }
    order_.resize(f_);
    for (std::size_t f = 0; f < f_; ++f) {
      auto& o = order_[f];
      o.resize(n_);
      std::iota(o.begin(), o.end(), 0u);
      const auto& col = cols_[f];
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return col[rows_[a]] < col[rows_[b]]; });
    }
    goes_left_.resize(n_);
    buffer_.resize(n_);
    use_all_ = params.max_features <= 0 || static_cast<std::size_t>(params.max_features) >= f_;
  }

  DecisionTree build() {
    std::vector<TreeNode> nodes(1);
    struct Task {
      std::int32_t id;
      std::size_t lo, hi;
    };
    std::vector<Task> stack = {{0, 0, n_}};
    while (!stack.empty()) {
      const Task t = stack.back();
      stack.pop_back();
      fill_node(nodes[static_cast<std::size_t>(t.id)], t.lo, t.hi);
      const auto split = best_split(nodes[static_cast<std::size_t>(t.id)], t.lo, t.hi);
      if (split.feature < 0) continue;
      const std::size_t mid = partition(split, t.lo, t.hi);
      const auto left = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      nodes.emplace_back();
      auto& node = nodes[static_cast<std::size_t>(t.id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, t.hi});
      stack.push_back({left, t.lo, mid});
    }
    DecisionTree tree(std::move(nodes), static_cast<int>(k_), static_cast<int>(f_), params_.min_leaf);
    tree.check_min_leaf();
    return tree;
  }

 private:
  double value(std::size_t f, std::uint32_t p) const { return cols_[f][rows_[p]]; }

  void fill_node(TreeNode& node, std::size_t lo, std::size_t hi) const {
    node.weighted.assign(k_, 0.0);
    node.samples = static_cast<std::int64_t>(hi - lo);
    const auto& o = order_[0];  // every table holds the same positions
    for (std::size_t i = lo; i < hi; ++i) node.weighted[y_[o[i]]] += w_[o[i]];
    node.weight = std::accumulate(node.weighted.begin(), node.weighted.end(), 0.0);
    node.impurity = gini(node.weighted, node.weight);
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> feats(f_);
    std::iota(feats.begin(), feats.end(), std::size_t{0});
    if (!use_all_) portable_shuffle(feats, rng_);
    return feats;
  }

  SplitChoice best_split(const TreeNode& node, std::size_t lo, std::size_t hi) {
    SplitChoice best;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (hi - lo < 2 * min_leaf || node.impurity <= 0) return best;
    const double node_cost = node.weight * node.impurity;
    double best_cost = node_cost - 1e-10 * std::max(1.0, node.weight);
    std::vector<double> left(k_);
    std::size_t examined = 0;
    for (std::size_t f : candidate_features()) {
      if (!use_all_ && examined >= static_cast<std::size_t>(params_.max_features)) break;
      const auto& o = order_[f];
      if (value(f, o[lo]) == value(f, o[hi - 1])) continue;  // constant here; does not count
      ++examined;
      std::fill(left.begin(), left.end(), 0.0);
      double wl = 0;
      for (std::size_t i = lo; i + 1 < hi; ++i) {
        const auto p = o[i];
        left[y_[p]] += w_[p];
        wl += w_[p];
        const double v = value(f, p);
        const double next = value(f, o[i + 1]);
        if (!(v < next)) continue;
        const std::size_t nl = i + 1 - lo;
        if (nl < min_leaf) continue;
        if (hi - lo - nl < min_leaf) break;
        double sql = 0, sqr = 0;
        for (std::size_t c = 0; c < k_; ++c) {
          sql += left[c] * left[c];
          const double r = node.weighted[c] - left[c];
          sqr += r * r;
        }
        const double wr = node.weight - wl;
        const double cost = (wl > 0 ? wl - sql / wl : 0.0) + (wr > 0 ? wr - sqr / wr : 0.0);
        const bool better = cost < best_cost ||
                            (best.feature >= 0 && cost == best_cost && static_cast<std::int32_t>(f) < best.feature);
        if (better) {
          best_cost = cost;
          best.feature = static_cast<std::int32_t>(f);
          best.threshold = v + (next - v) / 2;
          best.cost = cost;
        }
      }
    }
    return best;
  }

  std::size_t partition(const SplitChoice& s, std::size_t lo, std::size_t hi) {
    const auto f = static_cast<std::size_t>(s.feature);
    std::size_t nl = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto p = order_[f][i];
      goes_left_[p] = value(f, p) <= s.threshold;
      nl += goes_left_[p];
    }
    for (auto& o : order_) {
      std::size_t a = lo, b = lo + nl;
      for (std::size_t i = lo; i < hi; ++i) {
        const auto p = o[i];
        buffer_[goes_left_[p] ? a++ : b++] = p;
      }
      std::copy(buffer_.begin() + static_cast<std::ptrdiff_t>(lo), buffer_.begin() + static_cast<std::ptrdiff_t>(hi),
                o.begin() + static_cast<std::ptrdiff_t>(lo));
    }
    return lo + nl;
  }

  const std::vector<std::vector<double>>& cols_;
  std::size_t n_, k_, f_;
  TreeParams params_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> rows_;
  std::vector<std::uint32_t> y_;
  std::vector<double> w_;
  std::vector<std::vector<std::uint32_t>> order_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> buffer_;
  bool use_all_ = true;
};

}  // namespace

DecisionTree fit_tree(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> class_weights,
                      const TreeParams& params) {
  if (rows.empty()) throw InputError("cannot fit a tree on zero rows");
  return TreeBuilder(data, rows, class_weights, params).build();
}

int ForestModel::predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const {
  if (trees.empty()) return 0;
  std::vector<int> votes(static_cast<std::size_t>(trees.front().n_classes()), 0);
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(cols, vals))];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::uint64_t forest_tree_seed(std::uint64_t seed, int t) { return splitmix64(seed + static_cast<std::uint64_t>(t)); }

std::vector<std::size_t> forest_bootstrap(std::span<const std::size_t> rows, std::uint64_t seed, int t) {
  std::mt19937_64 rng(forest_tree_seed(seed, t));
  std::vector<std::size_t> out(rows.size());
  for (auto& r : out) r = rows[static_cast<std::size_t>(uniform_below(rng, rows.size()))];
  return out;
}

int forest_max_features(const ForestParams& params, std::size_t columns) {
  if (params.max_features < 0) return 0;
  if (params.max_features > 0) return params.max_features;
  return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(columns)))));
}

ForestModel fit_forest(const Dataset& data, std::span<const std::size_t> rows, std::span<const double> class_weights,
                       const ForestParams& params, std::uint64_t seed, int threads) {
  if (rows.empty()) throw InputError("cannot fit a forest on zero rows");
  if (params.n_trees < 1) throw ConfigError("forest needs at least one tree");
  ForestModel model;
  model.seed = seed;
  model.params = params;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));
  data.columns();  // build the shared dense copy before fanning out
  parallel_for(model.trees.size(), static_cast<unsigned>(std::max(1, threads)), [&](std::size_t t) {
    const auto boot = forest_bootstrap(rows, seed, static_cast<int>(t));
    TreeParams tp;
    tp.min_leaf = params.min_leaf;
    tp.max_features = forest_max_features(params, data.cols());
    tp.seed = splitmix64(forest_tree_seed(seed, static_cast<int>(t)));
    model.trees[t] = fit_tree(data, boot, class_weights, tp);
  });
  return model;
}

}  // namespace motifscope
