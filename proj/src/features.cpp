#include "motifscope/features.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

std::string_view mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::M: return "M";
    case FeatureMode::E: return "E";
    case FeatureMode::ME: return "ME";
    case FeatureMode::MxE: return "MxE";
  }
  return "?";
}

FeatureMode parse_mode(std::string_view s) {
  if (s == "M") return FeatureMode::M;
  if (s == "E") return FeatureMode::E;
  if (s == "ME" || s == "M+E") return FeatureMode::ME;
  if (s == "MxE" || s == "MXE" || s == "M×E") return FeatureMode::MxE;
  throw InputError("unknown feature mode \"" + std::string(s) + "\" (expected M, E, ME or MxE)");
}

std::int64_t FeatureVector::get(std::string_view key) const {
  auto it = std::lower_bound(features.begin(), features.end(), key,
                             [](const auto& kv, std::string_view k) { return kv.first < k; });
  return (it != features.end() && it->first == key) ? it->second : 0;
}

FeatureVector assemble_features(const std::vector<TypedMotifCount>& motifs, const std::vector<EdgeFeature>& edges,
                                FeatureMode mode) {
  if (mode == FeatureMode::MxE) {
    throw InputError("M×E features need motif instances; use count_motif_edges or Featurizer");
  }
  FeatureVector fv;
  fv.mode = mode;
  if (mode == FeatureMode::M || mode == FeatureMode::ME) {
    for (const auto& m : motifs) {
      if (m.count) fv.features.emplace_back(m.key, m.count);
    }
  }
  if (mode == FeatureMode::E || mode == FeatureMode::ME) {
    for (const auto& e : edges) {
      if (e.count) fv.features.emplace_back(e.key, e.count);
    }
  }
  std::sort(fv.features.begin(), fv.features.end());
  return fv;
}

Featurizer::Featurizer(MotifCatalog catalog, FeaturizerOptions options)
    : counter_(std::move(catalog), options.semantics), options_(options) {}

FeatureVector Featurizer::featurize(const EgoTransferNetwork& etn) const {
  FeatureVector fv;
  fv.ego = etn.ego();
  fv.mode = options_.mode;
  if (options_.mode == FeatureMode::MxE) {
    auto r = count_motif_edges(etn, counter_.catalog(), options_.semantics, options_.node_bound);
    fv.flagged = !r.complete;
    fv.features.reserve(r.counts.size());
    for (auto& c : r.counts) fv.features.emplace_back(std::move(c.key), c.count);
    return fv;
  }
  std::vector<std::pair<const std::string*, std::int64_t>> raw;
  raw.reserve(16);
  if (options_.mode != FeatureMode::E) counter_.count(etn, raw);
  if (options_.mode != FeatureMode::M) counter_.edges(etn, raw);
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return *a.first < *b.first; });
  fv.features.reserve(raw.size());
  for (const auto& [k, v] : raw) fv.features.emplace_back(*k, v);
  return fv;
}

FeatureVector Featurizer::featurize(const Transaction& tx, const AccountRegistry& accounts,
                                    const TokenRegistry& tokens) const {
  auto built = build_etn(tx, accounts, tokens);
  FeatureVector fv = featurize(built.network);
  fv.tx_hash = tx.tx_hash;
  return fv;
}

std::vector<FeatureVector> Featurizer::featurize_all(const std::vector<Transaction>& txs,
                                                     const AccountRegistry& accounts, const TokenRegistry& tokens,
                                                     unsigned threads) const {
  std::vector<FeatureVector> out(txs.size());
  std::vector<std::uint32_t> rejected(txs.size(), 0);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (txs.size() + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(txs.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      auto built = build_etn(txs[i], accounts, tokens);
      rejected[i] = static_cast<std::uint32_t>(built.rejected_transfers.size());
      out[i] = featurize(built.network);
      out[i].tx_hash = txs[i].tx_hash;
    }
  });
  std::size_t bad_tx = 0, bad_edges = 0, flagged = 0;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    bad_tx += rejected[i] ? 1 : 0;
    bad_edges += rejected[i];
    flagged += out[i].flagged ? 1 : 0;
  }
  if (bad_edges) {
    warn(std::to_string(bad_edges) + " transfer(s) in " + std::to_string(bad_tx) +
         " transaction(s) do not touch the ego and were left out of the network");
  }
  if (flagged) {
    warn(std::to_string(flagged) + " network(s) exceeded the node bound; their three-node M×E features are missing");
  }
  return out;
}

std::string feature_vector_to_json_line(const FeatureVector& fv) {
  json feats = json::object();
  for (const auto& [k, v] : fv.features) feats[k] = v;
  json j = {{"tx_hash", fv.tx_hash}, {"ego", fv.ego}, {"mode", mode_name(fv.mode)}, {"features", std::move(feats)}};
  if (fv.flagged) j["flagged"] = true;
  return j.dump();
}

FeatureVector feature_vector_from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(std::string("features file: ") + e.what());
  }
  FeatureVector fv;
  fv.tx_hash = j.at("tx_hash").get<std::string>();
  fv.ego = j.value("ego", std::string{});
  fv.mode = parse_mode(j.at("mode").get<std::string>());
  fv.flagged = j.value("flagged", false);
  for (const auto& [k, v] : j.at("features").items()) fv.features.emplace_back(k, v.get<std::int64_t>());
  std::sort(fv.features.begin(), fv.features.end());
  return fv;
}

void write_features(const std::string& path, const std::vector<FeatureVector>& rows) {
  std::string body;
  for (const auto& fv : rows) {
    body += feature_vector_to_json_line(fv);
    body.push_back('\n');
  }
  write_file(path, body);
}

std::vector<FeatureVector> read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open features file: " + path);
  std::vector<FeatureVector> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(feature_vector_from_json_line(line));
  }
  return rows;
}

Vocabulary::Vocabulary(std::vector<std::string> keys) : keys_(std::move(keys)) {
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  for (std::size_t i = 0; i < keys_.size(); ++i) index_.emplace(keys_[i], i);
}

Vocabulary Vocabulary::build(const std::vector<const FeatureVector*>& rows) {
  constexpr std::size_t kChunk = 8192;
  std::vector<std::set<std::string>> local((rows.size() + kChunk - 1) / kChunk);
  for (std::size_t c = 0; c < local.size(); ++c) {
    const std::size_t end = std::min(rows.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (const auto& kv : rows[i]->features) local[c].insert(kv.first);
    }
  }
  std::set<std::string> merged;
  for (auto& s : local) merged.merge(s);
  return Vocabulary(std::vector<std::string>(merged.begin(), merged.end()));
}

std::optional<std::size_t> Vocabulary::index(std::string_view key) const {
  auto it = index_.find(std::string(key));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace motifscope
