#include "motifscope/model.hpp"

#include <json.hpp>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Logistic: return "lr";
    case ModelKind::Tree: return "dt";
    case ModelKind::Forest: return "rf";
  }
  return "dt";
}

ModelKind parse_model_kind(std::string_view s) {
  const auto v = to_lower(s);
  if (v == "lr" || v == "logistic") return ModelKind::Logistic;
  if (v == "dt" || v == "tree") return ModelKind::Tree;
  if (v == "rf" || v == "forest") return ModelKind::Forest;
  throw ConfigError("unknown model type \"" + std::string(s) + "\" (expected lr, dt or rf)");
}

int TrainedModel::predict(const SparseRow& row) const {
  return std::visit([&](const auto& m) { return m.predict(row.cols, row.vals); }, model);
}

const DecisionTree& TrainedModel::tree() const {
  if (const auto* t = std::get_if<DecisionTree>(&model)) return *t;
  throw ConfigError("model is " + std::string(model_kind_name(kind)) + ", a decision tree (dt) is required");
}

namespace {

json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes()) {
    json j = {{"samples", n.samples}, {"weight", n.weight}, {"impurity", n.impurity}, {"weighted", n.weighted}};
    if (!n.is_leaf()) {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    nodes.push_back(std::move(j));
  }
  return {{"n_classes", t.n_classes()}, {"n_features", t.n_features()}, {"min_leaf", t.min_leaf()}, {"nodes", nodes}};
}

DecisionTree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.samples = jn.at("samples").get<std::int64_t>();
    n.weight = jn.at("weight").get<double>();
    n.impurity = jn.at("impurity").get<double>();
    n.weighted = jn.at("weighted").get<std::vector<double>>();
    if (jn.contains("feature")) {
      n.feature = jn.at("feature").get<std::int32_t>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<std::int32_t>();
      n.right = jn.at("right").get<std::int32_t>();
    }
    nodes.push_back(std::move(n));
  }
  const auto count = static_cast<std::int32_t>(nodes.size());
  for (const auto& n : nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= count || n.right >= count)) {
      throw InputError("tree node refers to a child outside the node list");
    }
  }
  if (nodes.empty()) throw InputError("tree has no nodes");
  return DecisionTree(std::move(nodes), j.at("n_classes").get<int>(), j.at("n_features").get<int>(),
                      j.at("min_leaf").get<int>());
}

json metrics_json(const Metrics& m) { return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}}; }

}  // namespace

std::string TrainedModel::to_json_text() const {
  json j;
  j["format"] = "motifscope-model";
  j["version"] = std::string(kVersion);
  j["type"] = std::string(model_kind_name(kind));
  j["mode"] = std::string(mode_name(mode));
  j["semantics"] = std::string(semantics_name(semantics));
  j["classes"] = classes;
  j["vocabulary"] = vocabulary.keys();
  if (const auto* lr = std::get_if<LogisticModel>(&model)) {
    j["params"] = {{"l2", lr->params.l2},
                   {"max_iter", lr->params.max_iter},
                   {"tol", lr->params.tol},
                   {"scale", lr->params.scale},
                   {"converged", lr->converged}};
    j["weights"] = lr->weights;
    j["bias"] = lr->bias;
  } else if (const auto* dt = std::get_if<DecisionTree>(&model)) {
    j["params"] = {{"min_leaf", dt->min_leaf()}};
    j["tree"] = tree_to_json(*dt);
  } else {
    const auto& rf = std::get<ForestModel>(model);
    j["params"] = {{"n_trees", rf.params.n_trees},
                   {"min_leaf", rf.params.min_leaf},
                   {"max_features", rf.params.max_features},
                   {"seed", rf.seed}};
    json trees = json::array();
    for (const auto& t : rf.trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
  }
  return j.dump(1) + "\n";
}

TrainedModel TrainedModel::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "motifscope-model") throw InputError("not a motifscope model file");
    TrainedModel m;
    m.kind = parse_model_kind(j.at("type").get<std::string>());
    m.mode = parse_mode(j.at("mode").get<std::string>());
    m.semantics = parse_semantics(j.value("semantics", "induced"));
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.vocabulary = Vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    const auto& p = j.at("params");
    switch (m.kind) {
      case ModelKind::Logistic: {
        LogisticModel lr;
        lr.params.l2 = p.at("l2").get<double>();
        lr.params.max_iter = p.at("max_iter").get<int>();
        lr.params.tol = p.at("tol").get<double>();
        lr.params.scale = p.value("scale", false);
        lr.converged = p.value("converged", true);
        lr.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        lr.bias = j.at("bias").get<std::vector<double>>();
        if (lr.weights.size() != m.classes.size() || lr.bias.size() != m.classes.size()) {
          throw InputError("logistic model has the wrong number of per-class weight vectors");
        }
        m.model = std::move(lr);
        break;
      }
      case ModelKind::Tree: m.model = tree_from_json(j.at("tree")); break;
      case ModelKind::Forest: {
        ForestModel rf;
        rf.params.n_trees = p.at("n_trees").get<int>();
        rf.params.min_leaf = p.at("min_leaf").get<int>();
        rf.params.max_features = p.at("max_features").get<int>();
        rf.seed = p.at("seed").get<std::uint64_t>();
        for (const auto& t : j.at("trees")) rf.trees.push_back(tree_from_json(t));
        m.model = std::move(rf);
        break;
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model file: ") + e.what());
  }
}

TrainedModel TrainedModel::load(const std::string& path) { return from_json_text(read_file(path)); }

void TrainedModel::save(const std::string& path) const { write_file(path, to_json_text()); }

TrainedModel train_model(const Dataset& data, std::span<const std::size_t> rows, const ModelConfig& config,
                         FeatureMode mode, MatchSemantics semantics) {
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (auto r : rows) labels.push_back(data.labels()[r]);
  const auto weights = class_weights(labels, data.n_classes());

  TrainedModel m;
  m.kind = config.kind;
  m.mode = mode;
  m.semantics = semantics;
  m.vocabulary = data.vocabulary();
  m.classes = data.classes();
  switch (config.kind) {
    case ModelKind::Logistic: m.model = fit_logistic(data, rows, weights, config.logistic); break;
    case ModelKind::Tree: m.model = fit_tree(data, rows, weights, config.tree); break;
    case ModelKind::Forest:
      m.model = fit_forest(data, rows, weights, config.forest, config.seed, config.threads);
      break;
  }
  return m;
}

std::string EvalReport::to_json_text() const {
  json j;
  j["classes"] = classes;
  json folds = json::array();
  for (const auto& m : per_fold) folds.push_back(metrics_json(m));
  j["folds"] = std::move(folds);
  j["mean"] = metrics_json(mean);
  j["confusion"] = confusion;
  j["confusion_row_percent"] = row_percentages(confusion);
  j["confusion_column_proportion"] = column_proportions(confusion);
  json pc = json::object();
  for (std::size_t c = 0; c < per_class.size() && c < classes.size(); ++c) pc[classes[c]] = metrics_json(per_class[c]);
  j["per_class"] = std::move(pc);
  return j.dump(1) + "\n";
}

EvalReport cross_validate(const Dataset& data, const std::vector<Fold>& folds, const ModelConfig& config,
                          FeatureMode mode, int threads) {
  const int k = data.n_classes();
  std::vector<Confusion> per_fold(folds.size());
  if (config.kind != ModelKind::Logistic) data.columns();
  auto inner = config;
  inner.threads = 1;
  parallel_for(folds.size(), static_cast<unsigned>(std::max(1, threads)), [&](std::size_t f) {
    const auto model = train_model(data, folds[f].train, inner, mode);
    std::vector<int> truth, pred;
    for (auto r : folds[f].test) {
      truth.push_back(data.labels()[r]);
      pred.push_back(std::visit([&](const auto& m) { return m.predict(data.row_cols(r), data.row_vals(r)); },
                                model.model));
    }
    per_fold[f] = confusion_matrix(truth, pred, k);
  });

  EvalReport rep;
  rep.classes = data.classes();
  rep.confusion.assign(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (const auto& cm : per_fold) {
    const auto m = macro_metrics(cm);
    rep.per_fold.push_back(m);
    rep.mean.precision += m.precision;
    rep.mean.recall += m.recall;
    rep.mean.f1 += m.f1;
    for (std::size_t i = 0; i < cm.size(); ++i)
      for (std::size_t j = 0; j < cm.size(); ++j) rep.confusion[i][j] += cm[i][j];
  }
  if (!folds.empty()) {
    const double n = static_cast<double>(folds.size());
    rep.mean.precision /= n;
    rep.mean.recall /= n;
    rep.mean.f1 /= n;
  }
  rep.per_class = per_class_metrics(rep.confusion);
  return rep;
}

EvalReport evaluate_model(const TrainedModel& model, const Dataset& data) {
  std::vector<int> truth, pred;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    truth.push_back(data.labels()[r]);
    pred.push_back(std::visit([&](const auto& m) { return m.predict(data.row_cols(r), data.row_vals(r)); },
                              model.model));
  }
  EvalReport rep;
  rep.classes = data.classes();
  rep.confusion = confusion_matrix(truth, pred, data.n_classes());
  rep.mean = macro_metrics(rep.confusion);
  rep.per_fold.push_back(rep.mean);
  rep.per_class = per_class_metrics(rep.confusion);
  return rep;
}

}  // namespace motifscope
