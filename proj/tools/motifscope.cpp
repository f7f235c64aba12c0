#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "motifscope/pipeline.hpp"
#include "motifscope/synth.hpp"
#include "motifscope/util.hpp"

using namespace motifscope;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kInput = 2, kStage = 3 };

int fail(int code, const std::string& kind, const std::string& message, const std::string& stage = {}) {
  json err = {{"error", {{"type", kind}, {"message", message}}}};
  if (!stage.empty()) err["error"]["stage"] = stage;
  std::cerr << err.dump() << std::endl;
  return code;
}

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string config;
  int resolved_threads() const { return threads > 0 ? threads : static_cast<int>(default_threads()); }
};

std::vector<FeatureVector> features_or_throw(const std::string& path) {
  auto rows = read_features(path);
  if (rows.empty()) warn("feature file holds no rows: " + path);
  return rows;
}

/// Optional model parameter overrides for train/eval, read from --config.
void apply_model_overrides(ModelConfig& mc, const std::string& path) {
  if (path.empty()) return;
  json j;
  try {
    j = json::parse(read_file(path));
    mc.tree.min_leaf = j.value("min_leaf", mc.tree.min_leaf);
    mc.forest.min_leaf = j.value("min_leaf", mc.forest.min_leaf);
    mc.forest.n_trees = j.value("n_trees", mc.forest.n_trees);
    mc.forest.max_features = j.value("max_features", mc.forest.max_features);
    mc.logistic.l2 = j.value("l2", mc.logistic.l2);
    mc.logistic.max_iter = j.value("max_iter", mc.logistic.max_iter);
    mc.logistic.tol = j.value("tol", mc.logistic.tol);
    mc.logistic.scale = j.value("scale", mc.logistic.scale);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model config: ") + e.what());
  }
}

/// Dataset over the selected groups that appear in the label file.
Dataset labeled_dataset(const std::vector<FeatureVector>& rows, const std::string& labels_path,
                        const std::vector<std::string>* classes = nullptr, const Vocabulary* vocab = nullptr) {
  const auto labels = load_group_labels(labels_path);
  if (classes) return make_dataset(rows, labels, *classes, vocab);
  std::set<std::string> present;
  for (const auto& [h, g] : labels) present.insert(std::string(group_name(g)));
  std::vector<std::string> names;
  for (const auto& c : selected_group_names()) {
    if (present.count(c)) names.push_back(c);
  }
  if (names.size() < 2) throw InputError("need labeled transactions from at least two method groups");
  return make_dataset(rows, labels, names, vocab);
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.rows());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = i;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motifscope: ego-network motif features, method inference and account profiling"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (default 0)");
  app.add_option("--threads", g.threads, "Worker thread cap (0: all cores)");
  app.add_option("--config", g.config, "Config file for the subcommand (pipeline, synth archetypes, model params)");

  std::function<void()> action;

  // ingest
  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Normalize transfer records into a transaction store");
  c_ingest->add_option("--transfers", ingest.transfers_path)->required();
  c_ingest->add_option("--tokens", ingest.tokens_path)->required();
  c_ingest->add_option("--accounts", ingest.accounts_path)->required();
  c_ingest->add_option("--methods", ingest.methods_path);
  c_ingest->add_option("--method-groups", ingest.method_groups_path);
  c_ingest->add_option("--out", ingest.out_dir)->required();
  c_ingest->callback([&] {
    action = [&] {
      const auto s = run_ingest(ingest);
      std::cout << json({{"rows_accepted", s.rows_accepted},
                         {"rows_rejected", s.rows_rejected},
                         {"transactions", s.transactions_after_spam},
                         {"labeled", s.labeled}})
                       .dump()
                << "\n";
    };
  });

  // stats
  std::string store_dir, out_path;
  auto* c_stats = app.add_subcommand("stats", "Corpus statistics of a store");
  c_stats->add_option("--store", store_dir)->required();
  c_stats->add_option("--out", out_path, "Write the report here instead of stdout");
  c_stats->callback([&] {
    action = [&] {
      const auto text = compute_stats(load_store(store_dir)).to_json_text();
      if (out_path.empty()) {
        std::cout << text;
      } else {
        write_file(out_path, text);
      }
    };
  });

  // etn
  std::string tx_hash, ego, dot_path;
  auto* c_etn = app.add_subcommand("etn", "Render one ego transfer network as DOT");
  c_etn->add_option("--store", store_dir)->required();
  c_etn->add_option("--tx", tx_hash)->required();
  c_etn->add_option("--ego", ego, "Ego account when the hash has several");
  c_etn->add_option("--dot", dot_path)->required();
  c_etn->callback([&] {
    action = [&] {
      const auto store = load_store(store_dir);
      const auto want = to_lower(tx_hash);
      for (const auto& tx : store.transactions) {
        if (to_lower(tx.tx_hash) != want || (!ego.empty() && tx.ego_account != to_lower(ego))) continue;
        const auto built = build_etn(tx, store.accounts, store.tokens);
        write_file(dot_path, etn_to_dot(built.network, tx.tx_hash));
        return;
      }
      throw InputError("transaction not found in store: " + tx_hash);
    };
  });

  // featurize
  std::string mode_text = "ME", semantics_text = "induced";
  std::size_t node_bound = 500;
  auto* c_feat = app.add_subcommand("featurize", "Motif and edge features for every transaction");
  c_feat->add_option("--store", store_dir)->required();
  c_feat->add_option("--mode", mode_text, "M, E, ME or MxE");
  c_feat->add_option("--semantics", semantics_text, "induced or noninduced");
  c_feat->add_option("--node-bound", node_bound, "Largest network for the MxE three-node pass");
  c_feat->add_option("--out", out_path)->required();
  c_feat->callback([&] {
    action = [&] {
      const auto store = load_store(store_dir);
      FeaturizerOptions opt;
      opt.mode = parse_mode(mode_text);
      opt.semantics = parse_semantics(semantics_text);
      opt.node_bound = node_bound;
      const Featurizer fz(enumerate_catalog(), opt);
      write_features(out_path, fz.featurize_all(store.transactions, store.accounts, store.tokens,
                                                static_cast<unsigned>(g.resolved_threads())));
    };
  });

  // train
  std::string features_path, labels_path, model_text = "dt", model_path;
  std::string train_mode;
  int min_leaf = 10, n_trees = 100;
  auto* c_train = app.add_subcommand("train", "Fit a classifier on labeled features");
  c_train->add_option("--features", features_path)->required();
  c_train->add_option("--labels", labels_path)->required();
  c_train->add_option("--model", model_text, "lr, dt or rf");
  c_train->add_option("--mode", train_mode, "Expected feature mode (checked against the file)");
  c_train->add_option("--min-leaf", min_leaf);
  c_train->add_option("--trees", n_trees);
  c_train->add_option("--out", out_path)->required();
  c_train->callback([&] {
    action = [&] {
      const auto rows = features_or_throw(features_path);
      if (rows.empty()) throw InputError("no feature rows to train on");
      const auto mode = rows.front().mode;
      if (!train_mode.empty() && parse_mode(train_mode) != mode) {
        throw InputError("feature file holds mode " + std::string(mode_name(mode)) + ", not " + train_mode);
      }
      const auto data = labeled_dataset(rows, labels_path);
      ModelConfig mc;
      mc.kind = parse_model_kind(model_text);
      mc.tree.min_leaf = mc.forest.min_leaf = min_leaf;
      mc.forest.n_trees = n_trees;
      mc.seed = g.seed;
      mc.threads = g.resolved_threads();
      apply_model_overrides(mc, g.config);
      train_model(data, all_rows(data), mc, mode).save(out_path);
    };
  });

  // eval
  int folds = 10;
  auto* c_eval = app.add_subcommand("eval", "Stratified k-fold evaluation of a model configuration");
  c_eval->add_option("--model", model_path)->required();
  c_eval->add_option("--features", features_path)->required();
  c_eval->add_option("--labels", labels_path)->required();
  c_eval->add_option("--folds", folds, "Folds for CV; 0 scores the fitted model as is");
  c_eval->add_option("--report", out_path)->required();
  c_eval->callback([&] {
    action = [&] {
      const auto model = TrainedModel::load(model_path);
      const auto rows = features_or_throw(features_path);
      if (folds == 0) {
        const auto data = labeled_dataset(rows, labels_path, &model.classes, &model.vocabulary);
        write_file(out_path, evaluate_model(model, data).to_json_text());
        return;
      }
      if (folds < 2) throw ConfigError("--folds must be 0 or at least 2");
      const auto data = labeled_dataset(rows, labels_path, &model.classes);
      auto mc = model_config_of(model);
      mc.seed = g.seed;
      mc.threads = g.resolved_threads();
      const auto f = stratified_kfold(data.labels(), data.n_classes(), folds, g.seed);
      write_file(out_path, cross_validate(data, f, mc, model.mode, g.resolved_threads()).to_json_text());
    };
  });

  // prune
  std::size_t target_leaves = 0;
  double alpha = -1;
  std::string path_csv;
  auto* c_prune = app.add_subcommand("prune", "Cost-complexity pruning of a decision tree");
  c_prune->add_option("--model", model_path)->required();
  auto* o_leaves = c_prune->add_option("--target-leaves", target_leaves);
  auto* o_alpha = c_prune->add_option("--alpha", alpha);
  o_leaves->excludes(o_alpha);
  c_prune->add_option("--features", features_path, "With --labels: adds CV metrics to the path");
  c_prune->add_option("--labels", labels_path);
  c_prune->add_option("--folds", folds);
  c_prune->add_option("--out", out_path)->required();
  c_prune->add_option("--path", path_csv);
  c_prune->add_option("--dot", dot_path);
  c_prune->callback([&] {
    action = [&] {
      const auto model = TrainedModel::load(model_path);
      const auto path = ccp_path(model.tree());
      std::vector<Metrics> cv;
      if (!features_path.empty() && !labels_path.empty()) {
        const auto data = labeled_dataset(features_or_throw(features_path), labels_path, &model.classes);
        std::vector<double> alphas;
        for (const auto& e : path.entries) alphas.push_back(e.alpha);
        TreeParams tp;
        tp.min_leaf = model.tree().min_leaf();
        cv = ccp_cv_curve(data, stratified_kfold(data.labels(), data.n_classes(), folds, g.seed), tp, alphas,
                          g.resolved_threads());
      }
      if (!path_csv.empty()) write_file(path_csv, ccp_path_csv(path, cv.empty() ? nullptr : &cv));
      std::size_t entry;
      if (*o_leaves || *o_alpha) {
        PruneTarget t;
        if (*o_leaves) t.leaves = target_leaves;
        if (*o_alpha) t.alpha = alpha;
        entry = select_pruned(path, t);
      } else if (!cv.empty()) {
        entry = best_cv_entry(cv);
      } else {
        throw ConfigError("give --target-leaves, --alpha, or --features with --labels to pick by CV");
      }
      const auto pruned = with_tree(model, path.tree(entry));
      pruned.save(out_path);
      if (!dot_path.empty()) write_file(dot_path, tree_to_dot(pruned));
      std::cout << json({{"alpha", path.entries[entry].alpha}, {"leaves", path.entries[entry].leaves}}).dump() << "\n";
    };
  });

  // signatures
  double threshold = 0.8;
  std::string itemset_text = "greedy", leaves_path;
  auto* c_sig = app.add_subcommand("signatures", "Per-leaf signature motifs of a pruned tree");
  c_sig->add_option("--model", model_path)->required();
  c_sig->add_option("--features", features_path)->required();
  c_sig->add_option("--labels", labels_path)->required();
  c_sig->add_option("--threshold", threshold, "Support threshold (strict)")->check(CLI::Range(0.0, 1.0));
  c_sig->add_option("--itemset", itemset_text, "greedy or exhaustive");
  c_sig->add_option("--out", out_path)->required();
  c_sig->add_option("--leaves", leaves_path, "Per-leaf CSV");
  c_sig->add_option("--dot", dot_path, "Tree with signatures as DOT");
  c_sig->callback([&] {
    action = [&] {
      const auto model = TrainedModel::load(model_path);
      const auto rows = features_or_throw(features_path);
      const auto labels = load_group_labels(labels_path);
      const std::set<std::string> classes(model.classes.begin(), model.classes.end());
      std::vector<const FeatureVector*> picked;
      for (const auto& fv : rows) {
        auto it = labels.find(fv.tx_hash);
        if (it != labels.end() && classes.count(std::string(group_name(it->second)))) picked.push_back(&fv);
      }
      const auto set = mine_signatures(model, picked, threshold, parse_itemset_mode(itemset_text), g.resolved_threads());
      write_file(out_path, set.to_json_text());
      if (!leaves_path.empty()) write_file(leaves_path, leaves_csv(set));
      if (!dot_path.empty()) write_file(dot_path, tree_to_dot(model, &set));
    };
  });

  // match
  std::string signatures_path;
  auto* c_match = app.add_subcommand("match", "Match transactions against signatures");
  c_match->add_option("--signatures", signatures_path)->required();
  c_match->add_option("--features", features_path)->required();
  c_match->add_option("--out", out_path)->required();
  c_match->callback([&] {
    action = [&] {
      const auto set = SignatureSet::from_json_text(read_file(signatures_path));
      const auto rows = read_features(features_path);
      std::vector<SignatureMatch> matches(rows.size());
      parallel_for(rows.size(), static_cast<unsigned>(g.resolved_threads()),
                   [&](std::size_t i) { matches[i] = match_signatures(rows[i], set); });
      write_matches(out_path, matches);
    };
  });

  // profile
  std::string matches_path;
  std::int64_t min_matches = 10;
  auto* c_profile = app.add_subcommand("profile", "Per-account signature usage profiles");
  c_profile->add_option("--matches", matches_path)->required();
  c_profile->add_option("--signatures", signatures_path, "Signature file; columns come from the matches otherwise");
  c_profile->add_option("--min-matches", min_matches);
  c_profile->add_option("--out", out_path)->required();
  c_profile->callback([&] {
    action = [&] {
      const auto matches = read_matches(matches_path);
      const auto set = signatures_path.empty() ? signatures_from_matches(matches)
                                               : SignatureSet::from_json_text(read_file(signatures_path));
      ProfileOptions po;
      po.min_matches = min_matches;
      write_file(out_path, build_profiles(matches, set, po).to_csv());
    };
  });

  // cluster
  std::string profiles_path, linkage_text = "ward", plot_dir;
  std::size_t max_k = 15;
  auto* c_cluster = app.add_subcommand("cluster", "Hierarchical clustering of account profiles");
  c_cluster->add_option("--profiles", profiles_path)->required();
  c_cluster->add_option("--linkage", linkage_text, "ward, complete or average");
  c_cluster->add_option("--max-k", max_k);
  c_cluster->add_option("--out", out_path)->required();
  c_cluster->add_option("--plotdata", plot_dir);
  c_cluster->callback([&] {
    action = [&] {
      const auto table = ProfileTable::from_csv(read_file(profiles_path));
      const auto r = hcluster(table, parse_linkage(linkage_text), max_k);
      write_file(out_path, r.to_json_text());
      if (!plot_dir.empty()) emit_clustermap_data(r, table, plot_dir);
    };
  });

  // synth
  std::size_t n = 1000;
  std::string skew_text = "config";
  double noise = -1, spam_rate = -1, unlabeled = -1;
  bool dump_config = false;
  auto* c_synth = app.add_subcommand("synth", "Generate a labeled synthetic corpus");
  c_synth->add_option("--n", n, "Transactions to generate");
  c_synth->add_option("--skew", skew_text, "config, reference or uniform");
  c_synth->add_option("--noise", noise);
  c_synth->add_option("--spam-rate", spam_rate);
  c_synth->add_option("--unlabeled", unlabeled);
  c_synth->add_flag("--dump-config", dump_config, "Print the built-in archetypes and exit");
  c_synth->add_option("--out", out_path);
  c_synth->callback([&] {
    action = [&] {
      auto config = g.config.empty() ? SynthConfig::defaults() : SynthConfig::from_json_file(g.config);
      if (dump_config) {
        std::cout << config.to_json_text();
        return;
      }
      if (out_path.empty()) throw ConfigError("synth needs --out");
      apply_skew(config, parse_skew(skew_text));
      if (noise >= 0) config.noise = noise;
      if (spam_rate >= 0) config.spam_rate = spam_rate;
      if (unlabeled >= 0) config.unlabeled = unlabeled;
      const auto s = generate(config, n, g.seed, out_path);
      std::cout << json({{"transactions", s.transactions}, {"transfers", s.transfers}, {"per_group", s.per_group}}).dump()
                << "\n";
    };
  });

  // pipeline
  PipelineConfig pc;
  std::string p_mode, p_model;
  auto* c_pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  c_pipe->add_option("--transfers", pc.transfers);
  c_pipe->add_option("--tokens", pc.tokens);
  c_pipe->add_option("--accounts", pc.accounts);
  c_pipe->add_option("--methods", pc.methods);
  c_pipe->add_option("--method-groups", pc.method_groups);
  c_pipe->add_option("--signatures", pc.signatures, "Used when no method labels are given");
  c_pipe->add_option("--mode", p_mode);
  c_pipe->add_option("--model", p_model);
  c_pipe->add_option("--out", pc.out_dir);
  c_pipe->callback([&] {
    action = [&] {
      PipelineConfig config = g.config.empty() ? PipelineConfig{} : PipelineConfig::from_json_file(g.config);
      // Command-line values override the file.
      for (auto [dst, src] : {std::pair{&config.transfers, &pc.transfers}, {&config.tokens, &pc.tokens},
                              {&config.accounts, &pc.accounts}, {&config.methods, &pc.methods},
                              {&config.method_groups, &pc.method_groups}, {&config.signatures, &pc.signatures},
                              {&config.out_dir, &pc.out_dir}}) {
        if (!src->empty()) *dst = *src;
      }
      if (!p_mode.empty()) config.mode = parse_mode(p_mode);
      if (!p_model.empty()) config.model = parse_model_kind(p_model);
      if (app.count("--seed")) config.seed = g.seed;
      if (app.count("--threads")) config.threads = g.threads;
      const auto r = run_pipeline(config);
      std::cout << json({{"branch", r.supervised ? "supervised" : "match-only"},
                         {"artifacts", r.artifacts.size()},
                         {"manifest", (std::filesystem::path(config.out_dir) / "manifest.json").string()}})
                       .dump()
                << "\n";
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(kInput, "usage_error", e.what());
  }
  set_warning_sink([](std::string_view w) { std::cerr << "warning: " << w << "\n"; });
  try {
    action();
  } catch (const StageError& e) {
    return fail(e.input_error() ? kInput : kStage, e.input_error() ? "input_error" : "stage_failure", e.what(),
                e.stage());
  } catch (const InputError& e) {
    return fail(kInput, "input_error", e.what());
  } catch (const ConfigError& e) {
    return fail(kInput, "config_error", e.what());
  } catch (const std::exception& e) {
    return fail(kStage, "stage_failure", e.what(), app.get_subcommands().front()->get_name());
  }
  return kOk;
}
