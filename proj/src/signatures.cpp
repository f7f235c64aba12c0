#include "motifscope/signatures.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

DecisionTree collapse_nodes(const DecisionTree& tree, const std::vector<bool>& collapse,
                            std::vector<std::int32_t>* origin) {
  const auto& src = tree.nodes();
  std::vector<TreeNode> out(1);
  std::vector<std::int32_t> from = {0};
  std::vector<std::int32_t> stack = {0};  // ids in `out`
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto s = static_cast<std::size_t>(from[static_cast<std::size_t>(id)]);
    TreeNode node = src[s];
    if (node.is_leaf() || (s < collapse.size() && collapse[s])) {
      node.feature = -1;
      node.threshold = 0;
      node.left = node.right = -1;
      out[static_cast<std::size_t>(id)] = std::move(node);
      continue;
    }
    const auto left = static_cast<std::int32_t>(out.size());
    out.emplace_back();
    out.emplace_back();
    from.push_back(node.left);
    from.push_back(node.right);
    node.left = left;
    node.right = left + 1;
    out[static_cast<std::size_t>(id)] = std::move(node);
    stack.push_back(left + 1);
    stack.push_back(left);
  }
  if (origin) *origin = std::move(from);
  return DecisionTree(std::move(out), tree.n_classes(), tree.n_features(), tree.min_leaf());
}

DecisionTree CcpPath::tree(std::size_t entry, std::vector<std::int32_t>* origin) const {
  return collapse_nodes(original, entries.at(entry).collapsed, origin);
}

CcpPath ccp_path(const DecisionTree& tree) {
  CcpPath path;
  path.original = tree;
  const auto& nodes = tree.nodes();
  const std::size_t n = nodes.size();
  const double w_root = nodes.empty() || nodes[0].weight <= 0 ? 1.0 : nodes[0].weight;
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = nodes[i].weight * nodes[i].impurity / w_root;

  std::vector<bool> collapsed(n, false);
  std::vector<std::size_t> leaves(n);
  std::vector<double> r_sub(n), g(n);

  // Post-order over the active tree; fills leaves/r_sub and returns the
  // nodes still splittable.
  auto measure = [&](std::vector<std::size_t>& internal) {
    internal.clear();
    std::vector<std::pair<std::size_t, bool>> stack = {{0, false}};
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      const auto& nd = nodes[id];
      if (nd.is_leaf() || collapsed[id]) {
        leaves[id] = 1;
        r_sub[id] = r[id];
        continue;
      }
      const auto l = static_cast<std::size_t>(nd.left), rt = static_cast<std::size_t>(nd.right);
      if (!expanded) {
        stack.emplace_back(id, true);
        stack.emplace_back(rt, false);
        stack.emplace_back(l, false);
        continue;
      }
      leaves[id] = leaves[l] + leaves[rt];
      r_sub[id] = r_sub[l] + r_sub[rt];
      g[id] = (r[id] - r_sub[id]) / static_cast<double>(leaves[id] - 1);
      internal.push_back(id);
    }
  };

  std::vector<std::size_t> internal;
  if (n == 0) return path;
  measure(internal);
  path.entries.push_back({0.0, leaves[0], r_sub[0], collapsed});
  while (!internal.empty()) {
    double gmin = g[internal.front()];
    for (auto id : internal) gmin = std::min(gmin, g[id]);
    const double tol = 1e-12 + 1e-9 * std::abs(gmin);
    for (auto id : internal) {
      if (g[id] <= gmin + tol) collapsed[id] = true;
    }
    measure(internal);
    double alpha = std::max(gmin, path.entries.back().alpha);
    if (path.entries.size() > 1 && alpha <= path.entries.back().alpha) {
      auto& last = path.entries.back();
      last.leaves = leaves[0];
      last.impurity = r_sub[0];
      last.collapsed = collapsed;
      continue;
    }
    if (alpha <= path.entries.back().alpha) alpha = std::nextafter(path.entries.back().alpha, 1.0);
    path.entries.push_back({alpha, leaves[0], r_sub[0], collapsed});
  }
  return path;
}

std::size_t select_pruned(const CcpPath& path, const PruneTarget& target) {
  if (path.entries.empty()) throw InputError("empty pruning path");
  if (target.alpha) {
    if (*target.alpha < 0) throw ConfigError("pruning alpha must be nonnegative");
    std::size_t pick = 0;
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
      if (path.entries[i].alpha <= *target.alpha) pick = i;
    }
    return pick;
  }
  if (!target.leaves) throw ConfigError("pruning target needs a leaf count or an alpha");
  const auto want = *target.leaves;
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    if (path.entries[i].leaves <= want) {
      if (path.entries[i].leaves != want) {
        warn("no pruned tree has exactly " + std::to_string(want) + " leaves; using " +
             std::to_string(path.entries[i].leaves) + " (alpha " + format_double(path.entries[i].alpha) + ")");
      }
      return i;
    }
  }
  warn("leaf target " + std::to_string(want) + " is unreachable; using the root-only tree");
  return path.entries.size() - 1;
}

std::vector<Metrics> ccp_cv_curve(const Dataset& data, const std::vector<Fold>& folds, const TreeParams& params,
                                  const std::vector<double>& alphas, int threads) {
  std::vector<std::vector<Metrics>> per_fold(folds.size());
  data.columns();
  parallel_for(folds.size(), static_cast<unsigned>(std::max(1, threads)), [&](std::size_t f) {
    std::vector<int> train_labels;
    for (auto r : folds[f].train) train_labels.push_back(data.labels()[r]);
    const auto w = class_weights(train_labels, data.n_classes());
    const auto path = ccp_path(fit_tree(data, folds[f].train, w, params));
    std::vector<int> truth;
    for (auto r : folds[f].test) truth.push_back(data.labels()[r]);
    for (double a : alphas) {
      PruneTarget t;
      t.alpha = a;
      const auto tree = path.tree(select_pruned(path, t));
      std::vector<int> pred;
      for (auto r : folds[f].test) pred.push_back(tree.predict(data.row_cols(r), data.row_vals(r)));
      per_fold[f].push_back(macro_metrics(confusion_matrix(truth, pred, data.n_classes())));
    }
  });
  std::vector<Metrics> out(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (const auto& pf : per_fold) {
      out[a].precision += pf[a].precision;
      out[a].recall += pf[a].recall;
      out[a].f1 += pf[a].f1;
    }
    if (!folds.empty()) {
      const double k = static_cast<double>(folds.size());
      out[a].precision /= k;
      out[a].recall /= k;
      out[a].f1 /= k;
    }
  }
  return out;
}

std::string_view itemset_mode_name(ItemsetMode m) { return m == ItemsetMode::Greedy ? "greedy" : "exhaustive"; }

ItemsetMode parse_itemset_mode(std::string_view s) {
  const auto v = to_lower(s);
  if (v == "greedy") return ItemsetMode::Greedy;
  if (v == "exhaustive") return ItemsetMode::Exhaustive;
  throw ConfigError("unknown itemset mode \"" + std::string(s) + "\" (expected greedy or exhaustive)");
}

namespace {

using Bits = std::vector<std::uint64_t>;

std::size_t popcount(const Bits& b) {
  std::size_t c = 0;
  for (auto w : b) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

Bits intersect(const Bits& a, const Bits& b) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
  return out;
}

struct Candidate {
  std::string_view key;
  Bits rows;
  std::size_t count = 0;
};

}  // namespace

Itemset mine_itemset(const std::vector<const SparseCounts*>& samples, double threshold, ItemsetMode mode,
                     std::size_t budget) {
  Itemset result;
  result.support = 1.0;
  const std::size_t n = samples.size();
  if (n == 0) return result;
  const std::size_t words = (n + 63) / 64;
  const double dn = static_cast<double>(n);
  auto qualifies = [&](std::size_t count) { return static_cast<double>(count) / dn > threshold; };

  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<Candidate> cands;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& [key, count] : *samples[s]) {
      if (count <= 0) continue;
      auto [it, fresh] = index.emplace(key, cands.size());
      if (fresh) cands.push_back({key, Bits(words, 0), 0});
      auto& c = cands[it->second];
      c.rows[s / 64] |= std::uint64_t{1} << (s % 64);
      ++c.count;
    }
  }
  std::erase_if(cands, [&](const Candidate& c) { return !qualifies(c.count); });

  Bits all(words, ~std::uint64_t{0});
  if (n % 64) all.back() = (std::uint64_t{1} << (n % 64)) - 1;

  std::vector<std::size_t> chosen;
  if (mode == ItemsetMode::Greedy) {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      return a.count != b.count ? a.count > b.count : a.key < b.key;
    });
    Bits cover = all;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      Bits next = intersect(cover, cands[i].rows);
      if (qualifies(popcount(next))) {
        cover = std::move(next);
        chosen.push_back(i);
      }
    }
    // Supports only shrink as the set grows, so a key rejected earlier cannot
    // qualify now; this re-check guards the maximality invariant.
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      if (qualifies(popcount(intersect(cover, cands[i].rows)))) {
        throw std::logic_error("greedy itemset is not maximal");
      }
    }
    result.support = static_cast<double>(popcount(cover)) / dn;
  } else {
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
    std::vector<std::size_t> current, best;
    std::size_t best_count = n;
    std::size_t visited = 0;
    std::function<void(std::size_t, const Bits&, std::size_t)> dfs = [&](std::size_t start, const Bits& cover,
                                                                          std::size_t cover_count) {
      if (++visited > budget) throw ConfigError("exhaustive itemset search exceeded its node budget");
      const bool better = current.size() > best.size() ||
                          (current.size() == best.size() && cover_count > best_count) ||
                          (current.size() == best.size() && cover_count == best_count && current < best);
      if (better) {
        best = current;
        best_count = cover_count;
      }
      if (current.size() + (cands.size() - start) < best.size()) return;
      for (std::size_t i = start; i < cands.size(); ++i) {
        Bits next = intersect(cover, cands[i].rows);
        const auto c = popcount(next);
        if (!qualifies(c)) continue;
        current.push_back(i);
        dfs(i + 1, next, c);
        current.pop_back();
      }
    };
    dfs(0, all, n);
    chosen = best;
    result.support = static_cast<double>(best_count) / dn;
  }
  for (auto i : chosen) result.items.push_back({std::string(cands[i].key), static_cast<double>(cands[i].count) / dn});
  std::sort(result.items.begin(), result.items.end(),
            [](const SignatureItem& a, const SignatureItem& b) { return a.key < b.key; });
  return result;
}

SignatureSet mine_signatures(const TrainedModel& pruned, const std::vector<const FeatureVector*>& rows,
                             double threshold, ItemsetMode mode, int threads) {
  const auto& tree = pruned.tree();
  std::vector<std::vector<const SparseCounts*>> by_leaf(tree.nodes().size());
  for (const auto* fv : rows) {
    const auto row = vectorize(*fv, pruned.vocabulary);
    by_leaf[static_cast<std::size_t>(tree.apply(row.cols, row.vals))].push_back(&fv->features);
  }
  std::vector<std::size_t> leaves;
  for (std::size_t i = 0; i < by_leaf.size(); ++i) {
    if (tree.nodes()[i].is_leaf() && !by_leaf[i].empty()) leaves.push_back(i);
  }
  SignatureSet set;
  set.mode = pruned.mode;
  set.semantics = pruned.semantics;
  set.threshold = threshold;
  set.itemset_mode = mode;
  set.signatures.resize(leaves.size());
  parallel_for(leaves.size(), static_cast<unsigned>(std::max(1, threads)), [&](std::size_t k) {
    const auto id = leaves[k];
    const auto& node = tree.nodes()[id];
    auto items = mine_itemset(by_leaf[id], threshold, mode);
    auto& sig = set.signatures[k];
    sig.leaf = static_cast<std::int32_t>(id);
    sig.group = pruned.classes.at(static_cast<std::size_t>(node.predicted()));
    sig.probability = node.weight > 0 ? node.weighted[static_cast<std::size_t>(node.predicted())] / node.weight : 0.0;
    sig.samples = static_cast<std::int64_t>(by_leaf[id].size());
    sig.items = std::move(items.items);
    sig.support = items.support;
  });
  for (const auto& sig : set.signatures) {
    if (sig.empty()) {
      warn("leaf " + std::to_string(sig.leaf) + " (" + sig.group + ") has no item above the support threshold; "
           "it is reported but not used for matching");
    }
  }
  return set;
}

std::string SignatureSet::to_json_text() const {
  json sigs = json::array();
  for (const auto& s : signatures) {
    json items = json::array();
    for (const auto& it : s.items) items.push_back({{"key", it.key}, {"support", it.support}});
    sigs.push_back({{"leaf", s.leaf},
                    {"group", s.group},
                    {"probability", s.probability},
                    {"samples", s.samples},
                    {"support", s.support},
                    {"items", std::move(items)}});
  }
  json j = {{"format", "motifscope-signatures"},
            {"version", std::string(kVersion)},
            {"mode", std::string(mode_name(mode))},
            {"semantics", std::string(semantics_name(semantics))},
            {"threshold", threshold},
            {"itemset_mode", std::string(itemset_mode_name(itemset_mode))},
            {"signatures", std::move(sigs)}};
  return j.dump(1) + "\n";
}

SignatureSet SignatureSet::from_json_text(std::string_view text) {
  try {
    const auto j = json::parse(text);
    if (j.value("format", "") != "motifscope-signatures") throw InputError("not a motifscope signatures file");
    SignatureSet set;
    set.mode = parse_mode(j.at("mode").get<std::string>());
    set.semantics = parse_semantics(j.value("semantics", "induced"));
    set.threshold = j.at("threshold").get<double>();
    set.itemset_mode = parse_itemset_mode(j.value("itemset_mode", "greedy"));
    for (const auto& js : j.at("signatures")) {
      LeafSignature s;
      s.leaf = js.at("leaf").get<std::int32_t>();
      s.group = js.at("group").get<std::string>();
      s.probability = js.at("probability").get<double>();
      s.samples = js.at("samples").get<std::int64_t>();
      s.support = js.value("support", 1.0);
      for (const auto& it : js.at("items")) s.items.push_back({it.at("key").get<std::string>(), it.at("support").get<double>()});
      std::sort(s.items.begin(), s.items.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
      set.signatures.push_back(std::move(s));
    }
    return set;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed signatures file: ") + e.what());
  }
}

std::vector<std::string> SignatureMatch::distinct_groups() const {
  std::vector<std::string> g = groups;
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

SignatureMatch match_signatures(const FeatureVector& fv, const SignatureSet& set) {
  SignatureMatch m;
  m.tx_hash = fv.tx_hash;
  m.ego = fv.ego;
  for (const auto& sig : set.signatures) {
    if (sig.empty()) continue;
    const bool all = std::all_of(sig.items.begin(), sig.items.end(), [&](const SignatureItem& it) { return fv.get(it.key) > 0; });
    if (all) {
      m.leaves.push_back(sig.leaf);
      m.groups.push_back(sig.group);
    }
  }
  return m;
}

std::string signature_match_to_json_line(const SignatureMatch& m) {
  return json{{"tx_hash", m.tx_hash}, {"ego", m.ego}, {"leaves", m.leaves}, {"groups", m.groups}}.dump();
}

SignatureMatch signature_match_from_json_line(std::string_view line) {
  try {
    const auto j = json::parse(line);
    SignatureMatch m;
    m.tx_hash = j.at("tx_hash").get<std::string>();
    m.ego = j.at("ego").get<std::string>();
    m.leaves = j.at("leaves").get<std::vector<std::int32_t>>();
    m.groups = j.at("groups").get<std::vector<std::string>>();
    if (m.leaves.size() != m.groups.size()) throw InputError("match record has mismatched leaves and groups");
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed match record: ") + e.what());
  }
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string tree_to_dot(const TrainedModel& model, const SignatureSet* signatures) {
  const auto& tree = model.tree();
  std::unordered_map<std::int32_t, const LeafSignature*> sig_of;
  if (signatures) {
    for (const auto& s : signatures->signatures) sig_of[s.leaf] = &s;
  }
  std::ostringstream dot;
  dot << "digraph tree {\n  node [fontname=\"Helvetica\"];\n";
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    const auto& n = tree.nodes()[i];
    if (n.is_leaf()) {
      const auto cls = static_cast<std::size_t>(n.predicted());
      const double purity = n.weight > 0 ? n.weighted[cls] / n.weight : 0.0;
      std::string label = dot_escape(model.classes.at(cls)) + "\\nsamples = " + std::to_string(n.samples) +
                          "\\npurity = " + format_double(std::round(purity * 1000) / 1000);
      if (auto it = sig_of.find(static_cast<std::int32_t>(i)); it != sig_of.end()) {
        for (const auto& item : it->second->items) label += "\\n" + dot_escape(item.key);
      }
      dot << "  n" << i << " [shape=box, label=\"" << label << "\"];\n";
    } else {
      dot << "  n" << i << " [shape=ellipse, label=\""
          << dot_escape(model.vocabulary.column_name(static_cast<std::size_t>(n.feature))) << " <= "
          << format_double(n.threshold) << "\\nsamples = " << n.samples << "\"];\n";
      dot << "  n" << i << " -> n" << n.left << " [label=\"yes\"];\n";
      dot << "  n" << i << " -> n" << n.right << " [label=\"no\"];\n";
    }
  }
  dot << "}\n";
  return dot.str();
}

}  // namespace motifscope
