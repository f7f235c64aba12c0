#include "motifscope/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;
namespace fs = std::filesystem;

std::string StatsReport::to_json_text() const {
  json accts = json::object();
  for (const auto& [ego, a] : accounts) {
    accts[ego] = {{"transactions", a.transactions},
                  {"distinct_tokens", a.distinct_tokens},
                  {"fraction_unlabeled", a.transactions ? static_cast<double>(a.unlabeled) / a.transactions : 0.0}};
  }
  json hist = json::object();
  for (const auto& [k, v] : transfers_hist) hist[std::to_string(k)] = v;
  json j = {{"transactions", transactions},
            {"transfers", transfers},
            {"fraction_unlabeled", fraction_unlabeled},
            {"fraction_unlabeled_tokens", fraction_unlabeled_tokens},
            {"transfers_per_transaction", std::move(hist)},
            {"per_group", per_group},
            {"accounts", std::move(accts)}};
  return j.dump(2) + "\n";
}

StatsReport compute_stats(const Store& store) {
  StatsReport r;
  std::map<std::string, std::set<std::string>> tokens;
  std::size_t unlabeled_tokens = 0, unlabeled_tx = 0;
  for (const auto& tx : store.transactions) {
    ++r.transactions;
    r.transfers += tx.transfers.size();
    ++r.transfers_hist[tx.transfers.size()];
    auto& a = r.accounts[tx.ego_account];
    ++a.transactions;
    if (!tx.method_group) {
      ++a.unlabeled;
      ++unlabeled_tx;
    } else {
      ++r.per_group[std::string(group_name(*tx.method_group))];
    }
    for (const auto& t : tx.transfers) {
      tokens[tx.ego_account].insert(t.token_contract.empty() ? "symbol:" + t.token_symbol : t.token_contract);
      if (store.tokens.category_of(t.token_contract, t.token_symbol) == TokenCategory::Unlabeled) ++unlabeled_tokens;
    }
  }
  for (auto& [ego, a] : r.accounts) a.distinct_tokens = tokens[ego].size();
  if (r.transactions) r.fraction_unlabeled = static_cast<double>(unlabeled_tx) / r.transactions;
  if (r.transfers) r.fraction_unlabeled_tokens = static_cast<double>(unlabeled_tokens) / r.transfers;
  return r;
}

// --- configuration ---

void PipelineConfig::validate() const {
  if (transfers.empty() || tokens.empty() || accounts.empty()) {
    throw ConfigError("pipeline needs transfers, tokens and accounts inputs");
  }
  if (out_dir.empty()) throw ConfigError("pipeline needs an output directory");
  if (!(support >= 0 && support < 1)) throw ConfigError("support threshold must lie in [0, 1)");
  if (min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (max_k < 2) throw ConfigError("max_k must be at least 2");
  if (min_matches < 1) throw ConfigError("min_matches must be at least 1");
  if (node_bound < 3) throw ConfigError("node_bound must be at least 3");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  if (target_leaves && *target_leaves < 1) throw ConfigError("target_leaves must be at least 1");
  if (alpha && !(*alpha >= 0)) throw ConfigError("alpha must be nonnegative");
  if (target_leaves && alpha) throw ConfigError("set at most one of target_leaves and alpha");
}

std::string PipelineConfig::to_json_text() const {
  json models = json::array();
  for (auto m : compare_models) models.push_back(std::string(model_kind_name(m)));
  json j = {{"transfers", transfers},
            {"tokens", tokens},
            {"accounts", accounts},
            {"methods", methods},
            {"method_groups", method_groups},
            {"signatures", signatures},
            {"out_dir", out_dir},
            {"mode", std::string(mode_name(mode))},
            {"semantics", std::string(semantics_name(semantics))},
            {"node_bound", node_bound},
            {"model", std::string(model_kind_name(model))},
            {"compare_models", std::move(models)},
            {"seed", seed},
            {"threads", threads},
            {"folds", folds},
            {"min_leaf", min_leaf},
            {"n_trees", n_trees},
            {"target_leaves", target_leaves ? json(*target_leaves) : json(nullptr)},
            {"alpha", alpha ? json(*alpha) : json(nullptr)},
            {"support", support},
            {"itemset", std::string(itemset_mode_name(itemset))},
            {"min_matches", min_matches},
            {"linkage", std::string(linkage_name(linkage))},
            {"max_k", max_k}};
  return j.dump(2) + "\n";
}

PipelineConfig PipelineConfig::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  static const std::set<std::string> known = {
      "transfers", "tokens",   "accounts",      "methods", "method_groups", "signatures", "out_dir",
      "mode",      "semantics", "node_bound",   "model",   "compare_models", "seed",      "threads",
      "folds",     "min_leaf", "n_trees",       "target_leaves", "alpha",   "support",    "itemset",
      "min_matches", "linkage", "max_k"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw ConfigError("unknown pipeline config key \"" + k + "\"");
  }
  PipelineConfig c;
  try {
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    str("transfers", c.transfers);
    str("tokens", c.tokens);
    str("accounts", c.accounts);
    str("methods", c.methods);
    str("method_groups", c.method_groups);
    str("signatures", c.signatures);
    str("out_dir", c.out_dir);
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    if (j.contains("semantics")) c.semantics = parse_semantics(j.at("semantics").get<std::string>());
    c.node_bound = j.value("node_bound", c.node_bound);
    if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
    if (j.contains("compare_models")) {
      c.compare_models.clear();
      for (const auto& m : j.at("compare_models")) c.compare_models.push_back(parse_model_kind(m.get<std::string>()));
    }
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.folds = j.value("folds", c.folds);
    c.min_leaf = j.value("min_leaf", c.min_leaf);
    c.n_trees = j.value("n_trees", c.n_trees);
    if (j.contains("target_leaves") && !j.at("target_leaves").is_null()) {
      c.target_leaves = j.at("target_leaves").get<std::size_t>();
    }
    if (j.contains("alpha") && !j.at("alpha").is_null()) c.alpha = j.at("alpha").get<double>();
    c.support = j.value("support", c.support);
    if (j.contains("itemset")) c.itemset = parse_itemset_mode(j.at("itemset").get<std::string>());
    c.min_matches = j.value("min_matches", c.min_matches);
    if (j.contains("linkage")) c.linkage = parse_linkage(j.at("linkage").get<std::string>());
    c.max_k = j.value("max_k", c.max_k);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed pipeline config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

// --- artifact helpers ---

ModelConfig model_config_of(const TrainedModel& model) {
  ModelConfig c;
  c.kind = model.kind;
  if (const auto* lr = std::get_if<LogisticModel>(&model.model)) c.logistic = lr->params;
  if (const auto* dt = std::get_if<DecisionTree>(&model.model)) c.tree.min_leaf = dt->min_leaf();
  if (const auto* rf = std::get_if<ForestModel>(&model.model)) {
    c.forest = rf->params;
    c.seed = rf->seed;
  }
  return c;
}

std::string ccp_path_csv(const CcpPath& path, const std::vector<Metrics>* cv) {
  std::ostringstream out;
  out << "alpha,leaves,impurity";
  if (cv) out << ",cv_precision,cv_recall,cv_f1";
  out << '\n';
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const auto& e = path.entries[i];
    out << format_double(e.alpha) << ',' << e.leaves << ',' << format_double(e.impurity);
    if (cv) {
      const auto& m = (*cv)[i];
      out << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ',' << format_double(m.f1);
    }
    out << '\n';
  }
  return out.str();
}

std::size_t best_cv_entry(const std::vector<Metrics>& cv) {
  if (cv.empty()) throw ConfigError("empty pruning curve");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cv.size(); ++i) {
    if (cv[i].f1 >= cv[best].f1) best = i;
  }
  return best;
}

TrainedModel with_tree(const TrainedModel& model, DecisionTree tree) {
  TrainedModel out = model;
  out.tree();  // kind check
  out.model = std::move(tree);
  return out;
}

std::string leaves_csv(const SignatureSet& set) {
  std::ostringstream out;
  out << "leaf,group,probability,samples,support,items\n";
  for (const auto& s : set.signatures) {
    std::string items;
    for (const auto& it : s.items) items += (items.empty() ? "" : " ") + it.key;
    out << s.leaf << ',' << csv_escape(s.group) << ',' << format_double(s.probability) << ',' << s.samples << ','
        << format_double(s.support) << ',' << csv_escape(items) << '\n';
  }
  return out.str();
}

SignatureSet signatures_from_matches(const std::vector<SignatureMatch>& matches) {
  std::map<std::int32_t, std::string> seen;
  for (const auto& m : matches) {
    for (std::size_t i = 0; i < m.leaves.size(); ++i) seen.emplace(m.leaves[i], m.groups[i]);
  }
  SignatureSet set;
  for (const auto& [leaf, group] : seen) {
    LeafSignature s;
    s.leaf = leaf;
    s.group = group;
    s.items.push_back({"?", 1.0});  // placeholder, marks the column as non-empty
    set.signatures.push_back(std::move(s));
  }
  return set;
}

std::vector<SignatureMatch> read_matches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read matches file: " + path);
  std::vector<SignatureMatch> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(signature_match_from_json_line(line));
  }
  return out;
}

void write_matches(const std::string& path, const std::vector<SignatureMatch>& matches) {
  std::string text;
  for (const auto& m : matches) {
    text += signature_match_to_json_line(m);
    text.push_back('\n');
  }
  write_file(path, text);
}

// --- pipeline ---

namespace {

template <class F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const InputError& e) {
    throw StageError(name, e.what(), true);
  } catch (const ConfigError& e) {
    throw StageError(name, e.what(), true);
  } catch (const std::exception& e) {
    throw StageError(name, e.what(), false);
  }
}

std::string classification_csv(const std::vector<std::pair<ModelKind, EvalReport>>& reports, FeatureMode mode) {
  std::ostringstream out;
  out << "model,mode,precision,recall,f1\n";
  for (const auto& [kind, r] : reports) {
    out << model_kind_name(kind) << ',' << mode_name(mode) << ',' << format_double(r.mean.precision) << ','
        << format_double(r.mean.recall) << ',' << format_double(r.mean.f1) << '\n';
  }
  return out.str();
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  const int threads = config.threads > 0 ? config.threads : static_cast<int>(default_threads());
  auto at = [&](const std::string& rel) { return (out / rel).string(); };
  PipelineResult result;

  stage("ingest", [&] {
    IngestOptions o;
    o.transfers_path = config.transfers;
    o.tokens_path = config.tokens;
    o.accounts_path = config.accounts;
    o.methods_path = config.methods;
    o.method_groups_path = config.method_groups;
    o.out_dir = at("store");
    run_ingest(o);
  });

  stage("stats", [&] { write_file(at("stats.json"), compute_stats(load_store(at("store"))).to_json_text()); });

  stage("featurize", [&] {
    const Store store = load_store(at("store"));
    FeaturizerOptions opt;
    opt.mode = config.mode;
    opt.semantics = config.semantics;
    opt.node_bound = config.node_bound;
    const Featurizer fz(enumerate_catalog(), opt);
    write_features(at("features.jsonl"), fz.featurize_all(store.transactions, store.accounts, store.tokens,
                                                           static_cast<unsigned>(threads)));
  });

  const auto labels = stage("labels", [&] { return load_group_labels(at("store/labels.csv")); });
  std::size_t selected = 0;
  for (const auto& [h, g] : labels) selected += g != MethodGroup::Unknown;
  result.supervised = !config.methods.empty() && selected > 0;
  std::string signatures_path;

  if (result.supervised) {
    // Classes present in the data, in canonical order.
    const auto features = stage("train", [&] { return read_features(at("features.jsonl")); });
    const Dataset data = stage("train", [&] {
      std::set<std::string> present;
      for (const auto& [h, g] : labels) present.insert(std::string(group_name(g)));
      std::vector<std::string> classes;
      for (const auto& c : selected_group_names()) {
        if (present.count(c)) {
          classes.push_back(c);
        } else {
          warn("no labeled transactions for group " + c + "; it is left out of the classes");
        }
      }
      if (classes.size() < 2) throw InputError("need labeled transactions from at least two method groups");
      return make_dataset(features, labels, classes);
    });
    const auto folds = stage("eval", [&] {
      return stratified_kfold(data.labels(), data.n_classes(), config.folds, config.seed);
    });
    std::vector<std::size_t> all(data.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    auto model_config = [&](ModelKind kind) {
      ModelConfig mc;
      mc.kind = kind;
      mc.tree.min_leaf = config.min_leaf;
      mc.forest.min_leaf = config.min_leaf;
      mc.forest.n_trees = config.n_trees;
      mc.seed = config.seed;
      mc.threads = threads;
      return mc;
    };

    stage("train", [&] {
      train_model(data, all, model_config(config.model), config.mode, config.semantics).save(at("model.json"));
    });
    stage("eval", [&] {
      const auto model = TrainedModel::load(at("model.json"));
      write_file(at("report.json"),
                 cross_validate(data, folds, model_config_of(model), config.mode, threads).to_json_text());
      std::vector<std::pair<ModelKind, EvalReport>> reports;
      for (auto kind : config.compare_models) {
        reports.emplace_back(kind, cross_validate(data, folds, model_config(kind), config.mode, threads));
      }
      write_file(at("classification.csv"), classification_csv(reports, config.mode));
    });

    stage("prune", [&] {
      const auto tree_model = config.model == ModelKind::Tree
                                  ? TrainedModel::load(at("model.json"))
                                  : train_model(data, all, model_config(ModelKind::Tree), config.mode, config.semantics);
      tree_model.save(at("tree.json"));
      const CcpPath path = ccp_path(tree_model.tree());
      std::vector<double> alphas;
      for (const auto& e : path.entries) alphas.push_back(e.alpha);
      TreeParams tp;
      tp.min_leaf = config.min_leaf;
      const auto cv = ccp_cv_curve(data, folds, tp, alphas, threads);
      write_file(at("path.csv"), ccp_path_csv(path, &cv));
      std::size_t entry = 0;
      if (config.target_leaves || config.alpha) {
        entry = select_pruned(path, PruneTarget{config.target_leaves, config.alpha});
      } else {
        entry = best_cv_entry(cv);
      }
      const auto pruned = with_tree(tree_model, path.tree(entry));
      pruned.save(at("pruned.json"));
      write_file(at("pruned.dot"), tree_to_dot(pruned));
    });

    stage("signatures", [&] {
      const auto pruned = TrainedModel::load(at("pruned.json"));
      std::vector<const FeatureVector*> rows;
      std::set<std::string> classes(pruned.classes.begin(), pruned.classes.end());
      for (const auto& fv : features) {
        auto it = labels.find(fv.tx_hash);
        if (it != labels.end() && classes.count(std::string(group_name(it->second)))) rows.push_back(&fv);
      }
      const auto set = mine_signatures(pruned, rows, config.support, config.itemset, threads);
      write_file(at("signatures.json"), set.to_json_text());
      write_file(at("leaves.csv"), leaves_csv(set));
      write_file(at("signatures.dot"), tree_to_dot(pruned, &set));
    });
    signatures_path = at("signatures.json");
  } else {
    if (config.signatures.empty()) {
      throw StageError("match", "no method labels available and no signatures file given", true);
    }
    warn("no method labels: skipping training and matching with the supplied signatures");
    signatures_path = config.signatures;
  }

  const SignatureSet sigset =
      stage("match", [&] { return SignatureSet::from_json_text(read_file(signatures_path)); });
  stage("match", [&] {
    const auto features = read_features(at("features.jsonl"));
    std::vector<SignatureMatch> matches(features.size());
    parallel_for(features.size(), static_cast<unsigned>(threads),
                 [&](std::size_t i) { matches[i] = match_signatures(features[i], sigset); });
    write_matches(at("matches.jsonl"), matches);
  });

  stage("profile", [&] {
    ProfileOptions po;
    po.min_matches = config.min_matches;
    const auto table = build_profiles(read_matches(at("matches.jsonl")), sigset, po);
    write_file(at("profiles.csv"), table.to_csv());
    write_file(at("profiles_normalized.csv"), table.normalized_csv());
    write_file(at("profiles_zscored.csv"), table.zscored_csv());
  });

  stage("cluster", [&] {
    const auto table = ProfileTable::from_csv(read_file(at("profiles.csv")));
    if (table.accounts.size() < 2) {
      warn("fewer than 2 profiled accounts; clustering skipped");
      return;
    }
    const auto clusters = hcluster(table, config.linkage, config.max_k);
    write_file(at("clusters.json"), clusters.to_json_text());
    emit_clustermap_data(clusters, table, at("plotdata"));
  });

  stage("manifest", [&] {
    for (const auto& entry : fs::recursive_directory_iterator(out)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), out).generic_string();
      if (rel == "manifest.json") continue;
      result.artifacts[rel] = sha256_file(entry.path().string());
    }
    json inputs = json::object();
    auto input = [&](const char* name, const std::string& path) {
      if (!path.empty()) inputs[name] = {{"path", path}, {"sha256", sha256_file(path)}};
    };
    input("transfers", config.transfers);
    input("tokens", config.tokens);
    input("accounts", config.accounts);
    input("methods", config.methods);
    input("method_groups", config.method_groups);
    if (!result.supervised) input("signatures", config.signatures);
    json manifest = {{"format", "motifscope-manifest"},
                     {"version", kVersion},
                     {"seed", config.seed},
                     {"branch", result.supervised ? "supervised" : "match-only"},
                     {"config", json::parse(config.to_json_text())},
                     {"inputs", std::move(inputs)},
                     {"artifacts", result.artifacts}};
    write_file(at("manifest.json"), manifest.dump(2) + "\n");
  });
  return result;
}

}  // namespace motifscope
