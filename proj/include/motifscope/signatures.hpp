#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "motifscope/model.hpp"

namespace motifscope {

struct CcpEntry {
  double alpha = 0;
  std::size_t leaves = 0;
  double impurity = 0;            ///< total R over leaves, normalized by root weight
  std::vector<bool> collapsed;    ///< per node of the unpruned tree
};

/// Minimal cost-complexity pruning path. Snapshots are stored as collapse
/// masks over the unpruned tree and materialized on demand.
struct CcpPath {
  DecisionTree original;
  std::vector<CcpEntry> entries;  ///< entry 0: unpruned, alpha 0; last: root only

  DecisionTree tree(std::size_t entry, std::vector<std::int32_t>* origin = nullptr) const;
};

/// R(t) = W_t * gini_t / W_root; g(t) = (R(t) - R(T_t)) / (|leaves(T_t)| - 1).
/// Each step collapses every node whose g equals the current minimum.
CcpPath ccp_path(const DecisionTree& tree);

/// Tree with every node in `collapse` turned into a leaf (descendants
/// dropped). Node ids are assigned in the same order fit_tree uses, so an
/// empty collapse set reproduces the input exactly.
DecisionTree collapse_nodes(const DecisionTree& tree, const std::vector<bool>& collapse,
                            std::vector<std::int32_t>* origin = nullptr);

struct PruneTarget {
  std::optional<std::size_t> leaves;
  std::optional<double> alpha;
};

/// By leaf count: the smallest-alpha entry with leaves <= target (warns when
/// the count is not hit exactly). By alpha: the last entry whose alpha does
/// not exceed it.
std::size_t select_pruned(const CcpPath& path, const PruneTarget& target);

/// Cross-validated macro metrics of the pruned tree at each alpha: every fold
/// grows its own tree and prunes it at that alpha.
std::vector<Metrics> ccp_cv_curve(const Dataset& data, const std::vector<Fold>& folds, const TreeParams& params,
                                  const std::vector<double>& alphas, int threads = 1);

enum class ItemsetMode { Greedy, Exhaustive };
std::string_view itemset_mode_name(ItemsetMode m);
ItemsetMode parse_itemset_mode(std::string_view s);

struct SignatureItem {
  std::string key;
  double support = 0;  ///< single-item support within the leaf
  bool operator==(const SignatureItem&) const = default;
};

struct Itemset {
  std::vector<SignatureItem> items;  ///< sorted by key
  double support = 0;                ///< joint support (1.0 when empty)
};

/// Binarized frequent-itemset search over leaf samples: support(S) is the
/// fraction of samples holding every key of S with count > 0, and only sets
/// with support strictly above `threshold` qualify.
///
/// Greedy: walk keys by descending single support (ties by key), keep a key
/// when the grown set still qualifies. The result is maximal.
/// Exhaustive: the longest qualifying set; ties by higher joint support,
/// then lexicographic key order. `budget` caps visited search nodes
/// (ConfigError when exceeded).
Itemset mine_itemset(const std::vector<const SparseCounts*>& samples, double threshold,
                     ItemsetMode mode = ItemsetMode::Greedy, std::size_t budget = 50'000'000);

struct LeafSignature {
  std::int32_t leaf = -1;  ///< node id in the pruned tree
  std::string group;
  double probability = 0;  ///< weighted purity of the leaf
  std::int64_t samples = 0;
  std::vector<SignatureItem> items;
  double support = 0;

  bool empty() const { return items.empty(); }
};

struct SignatureSet {
  FeatureMode mode = FeatureMode::ME;
  MatchSemantics semantics = MatchSemantics::Induced;
  double threshold = 0.8;
  ItemsetMode itemset_mode = ItemsetMode::Greedy;
  std::vector<LeafSignature> signatures;  ///< ascending leaf id

  std::string to_json_text() const;
  static SignatureSet from_json_text(std::string_view text);
};

/// Routes `rows` through the pruned tree and mines one signature per leaf
/// that receives samples. Leaves are mined in parallel.
SignatureSet mine_signatures(const TrainedModel& pruned, const std::vector<const FeatureVector*>& rows,
                             double threshold = 0.8, ItemsetMode mode = ItemsetMode::Greedy, int threads = 1);

struct SignatureMatch {
  std::string tx_hash;
  std::string ego;
  std::vector<std::int32_t> leaves;
  std::vector<std::string> groups;  ///< one per matched leaf

  /// Distinct groups, sorted.
  std::vector<std::string> distinct_groups() const;
};

/// Subset test against every non-empty signature.
SignatureMatch match_signatures(const FeatureVector& fv, const SignatureSet& set);

std::string signature_match_to_json_line(const SignatureMatch& m);
SignatureMatch signature_match_from_json_line(std::string_view line);

/// DOT rendering of a (pruned) tree; leaves carry their group, sample count,
/// purity and signature when one is supplied.
std::string tree_to_dot(const TrainedModel& model, const SignatureSet* signatures = nullptr);

}  // namespace motifscope
