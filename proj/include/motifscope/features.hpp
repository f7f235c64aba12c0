#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "motifscope/ingest.hpp"
#include "motifscope/motif.hpp"

namespace motifscope {

enum class FeatureMode { M, E, ME, MxE };

std::string_view mode_name(FeatureMode m);
/// Accepts M, E, ME, M+E, MxE, M×E. Throws InputError otherwise.
FeatureMode parse_mode(std::string_view s);

using SparseCounts = std::vector<std::pair<std::string, std::int64_t>>;  ///< sorted by key, unique

struct FeatureVector {
  std::string tx_hash;
  std::string ego;
  FeatureMode mode = FeatureMode::ME;
  SparseCounts features;
  bool flagged = false;  ///< M×E three-node pass skipped on an oversized network

  std::int64_t get(std::string_view key) const;
  bool operator==(const FeatureVector&) const = default;
};

/// Assembles one mode from the two feature families.
FeatureVector assemble_features(const std::vector<TypedMotifCount>& motifs, const std::vector<EdgeFeature>& edges,
                                FeatureMode mode);

struct FeaturizerOptions {
  FeatureMode mode = FeatureMode::ME;
  MatchSemantics semantics = MatchSemantics::Induced;
  std::size_t node_bound = 500;
};

/// ETN build + motif count + edge features for one mode.
class Featurizer {
 public:
  Featurizer(MotifCatalog catalog, FeaturizerOptions options);

  FeatureVector featurize(const EgoTransferNetwork& etn) const;
  FeatureVector featurize(const Transaction& tx, const AccountRegistry& accounts, const TokenRegistry& tokens) const;

  /// Results are written by index, so any thread count gives identical output.
  std::vector<FeatureVector> featurize_all(const std::vector<Transaction>& txs, const AccountRegistry& accounts,
                                           const TokenRegistry& tokens, unsigned threads) const;

  const FeaturizerOptions& options() const { return options_; }
  const MotifCatalog& catalog() const { return counter_.catalog(); }

 private:
  MotifCounter counter_;
  FeaturizerOptions options_;
};

std::string feature_vector_to_json_line(const FeatureVector& fv);
FeatureVector feature_vector_from_json_line(std::string_view line);
void write_features(const std::string& path, const std::vector<FeatureVector>& rows);
std::vector<FeatureVector> read_features(const std::string& path);

/// Closed training vocabulary: keys in lexicographic order, plus one OOV
/// column (index == keys().size()) that sums every unseen key.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> keys);

  /// Two-phase build: per-chunk key sets, merged once.
  static Vocabulary build(const std::vector<const FeatureVector*>& rows);

  const std::vector<std::string>& keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  std::size_t columns() const { return keys_.size() + 1; }
  std::size_t oov_column() const { return keys_.size(); }
  std::optional<std::size_t> index(std::string_view key) const;
  static constexpr std::string_view kOovName = "<OOV>";
  std::string column_name(std::size_t c) const { return c < keys_.size() ? keys_[c] : std::string(kOovName); }

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace motifscope
