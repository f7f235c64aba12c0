#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "motifscope/dataset.hpp"
#include "motifscope/logistic.hpp"
#include "motifscope/tree.hpp"
#include "motifscope/validation.hpp"

namespace motifscope {

enum class ModelKind { Logistic, Tree, Forest };
std::string_view model_kind_name(ModelKind k);  ///< "lr", "dt", "rf"
ModelKind parse_model_kind(std::string_view s);

struct ModelConfig {
  ModelKind kind = ModelKind::Tree;
  LogisticParams logistic;
  TreeParams tree;
  ForestParams forest;
  std::uint64_t seed = 0;
  int threads = 1;  ///< forest trees only
};

/// A fitted classifier plus everything needed to featurize and vectorize new
/// transactions the same way.
struct TrainedModel {
  ModelKind kind = ModelKind::Tree;
  FeatureMode mode = FeatureMode::ME;
  MatchSemantics semantics = MatchSemantics::Induced;
  Vocabulary vocabulary;
  std::vector<std::string> classes;
  std::variant<LogisticModel, DecisionTree, ForestModel> model;

  int predict(const SparseRow& row) const;
  int predict(const FeatureVector& fv) const { return predict(vectorize(fv, vocabulary)); }
  const DecisionTree& tree() const;  ///< throws ConfigError unless kind == Tree

  std::string to_json_text() const;
  static TrainedModel from_json_text(std::string_view text);
  static TrainedModel load(const std::string& path);
  void save(const std::string& path) const;
};

/// Fits on a row subset with balanced class weights computed on that subset.
TrainedModel train_model(const Dataset& data, std::span<const std::size_t> rows, const ModelConfig& config,
                         FeatureMode mode, MatchSemantics semantics = MatchSemantics::Induced);

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<Metrics> per_fold;
  Metrics mean;
  Confusion confusion;  ///< pooled over folds
  std::vector<Metrics> per_class;  ///< from the pooled matrix

  std::string to_json_text() const;
};

/// Cross-validated evaluation; folds train in parallel and merge in order.
EvalReport cross_validate(const Dataset& data, const std::vector<Fold>& folds, const ModelConfig& config,
                          FeatureMode mode, int threads = 1);

/// Scores a fixed model on a dataset (single pooled "fold").
EvalReport evaluate_model(const TrainedModel& model, const Dataset& data);

}  // namespace motifscope
