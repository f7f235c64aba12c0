#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "motifscope/profile.hpp"
#include "motifscope/signatures.hpp"

namespace motifscope {

/// Corpus statistics over a normalized store.
struct StatsReport {
  struct Account {
    std::size_t transactions = 0;
    std::size_t distinct_tokens = 0;
    std::size_t unlabeled = 0;  ///< transactions without a method label
  };
  std::size_t transactions = 0;
  std::size_t transfers = 0;
  std::map<std::string, Account> accounts;           ///< by ego
  std::map<std::size_t, std::size_t> transfers_hist;  ///< transfers per transaction -> transactions
  std::map<std::string, std::size_t> per_group;
  double fraction_unlabeled = 0;           ///< transactions without a method label
  double fraction_unlabeled_tokens = 0;    ///< transfers of uncategorized tokens

  std::string to_json_text() const;
};

StatsReport compute_stats(const Store& store);

/// Failure inside a named pipeline stage.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause, bool input_error)
      : std::runtime_error(cause), stage_(std::move(stage)), input_error_(input_error) {}
  const std::string& stage() const { return stage_; }
  bool input_error() const { return input_error_; }

 private:
  std::string stage_;
  bool input_error_;
};

struct PipelineConfig {
  std::string transfers, tokens, accounts;
  std::string methods;        ///< empty: no labels, match-only branch
  std::string method_groups;  ///< empty: shipped table
  std::string signatures;     ///< required by the match-only branch
  std::string out_dir;

  FeatureMode mode = FeatureMode::ME;
  MatchSemantics semantics = MatchSemantics::Induced;
  std::size_t node_bound = 500;
  ModelKind model = ModelKind::Tree;
  std::vector<ModelKind> compare_models = {ModelKind::Logistic, ModelKind::Tree, ModelKind::Forest};
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0: hardware concurrency
  int folds = 10;
  int min_leaf = 10;
  int n_trees = 100;
  std::optional<std::size_t> target_leaves;
  std::optional<double> alpha;  ///< neither set: best CV macro F1 on the path
  double support = 0.8;
  ItemsetMode itemset = ItemsetMode::Greedy;
  std::int64_t min_matches = 10;
  Linkage linkage = Linkage::Ward;
  std::size_t max_k = 15;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  std::string to_json_text() const;
  static PipelineConfig from_json_text(std::string_view text);
  static PipelineConfig from_json_file(const std::string& path);
};

struct PipelineResult {
  bool supervised = true;
  std::map<std::string, std::string> artifacts;  ///< path relative to out_dir -> sha256
};

/// ingest -> stats -> featurize -> [train/eval -> prune -> signatures] ->
/// match -> profile -> cluster. Every stage reads its inputs from files the
/// previous stage wrote; manifest.json lists inputs and artifact digests.
PipelineResult run_pipeline(const PipelineConfig& config);

// --- artifact helpers shared with the command-line tool ---

/// The training configuration stored inside a fitted model.
ModelConfig model_config_of(const TrainedModel& model);

/// alpha, leaves, impurity and (when given) CV precision/recall/f1 per entry.
std::string ccp_path_csv(const CcpPath& path, const std::vector<Metrics>* cv = nullptr);

/// Index of the entry with the best CV macro F1; ties to the larger alpha.
std::size_t best_cv_entry(const std::vector<Metrics>& cv);

/// Copy of a tree model with its tree replaced by a pruned one.
TrainedModel with_tree(const TrainedModel& model, DecisionTree tree);

/// Per-leaf table: leaf, group, probability, samples, support, items.
std::string leaves_csv(const SignatureSet& set);

/// Signature columns recovered from match records alone (one per
/// (leaf, group) seen), for profiling without the signature file.
SignatureSet signatures_from_matches(const std::vector<SignatureMatch>& matches);

std::vector<SignatureMatch> read_matches(const std::string& path);
void write_matches(const std::string& path, const std::vector<SignatureMatch>& matches);

}  // namespace motifscope
