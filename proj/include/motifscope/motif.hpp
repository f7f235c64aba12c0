#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "motifscope/etn.hpp"

namespace motifscope {

/// One ego-rooted motif. `roles` holds the pair state (kStateOut, kStateIn,
/// kStateBoth) of neighbor slot i and, for three-node shapes, slot j.
struct MotifShape {
  std::string id;
  std::vector<std::uint8_t> roles;

  bool three_node() const { return roles.size() == 2; }
  bool symmetric() const { return three_node() && roles[0] == roles[1]; }
  /// Size of the automorphism group fixing the ego (1 or 2).
  int automorphisms() const { return symmetric() ? 2 : 1; }
};

class MotifCatalog {
 public:
  MotifCatalog() = default;
  /// Validates every shape; throws ConfigError on an edge between neighbor
  /// slots, an isolated slot, a wrong node count, or two isomorphic entries.
  explicit MotifCatalog(std::vector<MotifShape> shapes);

  const std::vector<MotifShape>& shapes() const { return shapes_; }
  std::size_t size() const { return shapes_.size(); }

  /// catalog.json: [{id, nodes:["E","i"(,"j")], edges:[["E","i"],...]}]
  static MotifCatalog from_json_text(const std::string& text);
  static MotifCatalog from_json_file(const std::string& path);
  std::string to_json_text() const;

 private:
  std::vector<MotifShape> shapes_;
};

/// All non-isomorphic ego-rooted digraphs on {E,i} and {E,i,j} whose edges
/// all touch E, enumerated from the three pair states. Yields 3 two-node and
/// 6 three-node shapes, ids m1..m9 in that order.
MotifCatalog enumerate_catalog();

enum class MatchSemantics {
  Induced,     ///< a node subset matches the shape whose edge set equals its induced edges
  NonInduced,  ///< edge-preserving injective maps divided by automorphisms
};
std::string_view semantics_name(MatchSemantics s);  ///< "induced" / "noninduced"
MatchSemantics parse_semantics(std::string_view s);

struct TypedMotifCount {
  std::string key;  ///< "m4(E,A,C)"
  std::int64_t count = 0;
  bool operator==(const TypedMotifCount&) const = default;
};

struct EdgeFeature {
  std::string key;  ///< "(E,C)Stablecoin"
  std::int64_t count = 0;
  bool operator==(const EdgeFeature&) const = default;
};

std::string motif_key(const MotifShape& shape, AccountType ti, AccountType tj = AccountType::Ego);
std::string edge_key(AccountType source, AccountType target, TokenCategory category);

/// Typed motif counts with nonzero count, sorted by key.
std::vector<TypedMotifCount> count_motifs(const EgoTransferNetwork& etn, const MotifCatalog& catalog,
                                          MatchSemantics semantics = MatchSemantics::Induced);

/// Edge-list features over all (parallel-inclusive) edges, sorted by key.
std::vector<EdgeFeature> edge_features(const EgoTransferNetwork& etn);

/// Motif-by-edge features: one key per motif instance combining its typed
/// motif key with the sorted multiset of its edges' labels, e.g.
/// "m3(E,C)|(C,E)Synthetic+(E,C)Stablecoin". Under NonInduced semantics an
/// instance carries only the edges whose direction the shape uses.
/// Returns false in `complete` when more than `bucket_limit` distinct
/// neighbor signatures made the three-node pass too large to run.
struct MotifEdgeResult {
  std::vector<TypedMotifCount> counts;
  bool complete = true;
};
MotifEdgeResult count_motif_edges(const EgoTransferNetwork& etn, const MotifCatalog& catalog,
                                  MatchSemantics semantics = MatchSemantics::Induced,
                                  std::size_t bucket_limit = 500);

/// Precomputed key strings for the fast featurization path.
class MotifCounter {
 public:
  MotifCounter(MotifCatalog catalog, MatchSemantics semantics);

  const MotifCatalog& catalog() const { return catalog_; }
  MatchSemantics semantics() const { return semantics_; }

  /// Appends (key, count) pairs for nonzero typed motifs; keys unsorted.
  void count(const EgoTransferNetwork& etn, std::vector<std::pair<const std::string*, std::int64_t>>& out) const;
  void edges(const EgoTransferNetwork& etn, std::vector<std::pair<const std::string*, std::int64_t>>& out) const;

 private:
  MotifCatalog catalog_;
  MatchSemantics semantics_;
  // [shape][ti][tj] with tj = 0 for two-node shapes; types indexed by AccountType.
  std::vector<std::array<std::array<std::string, 4>, 4>> motif_keys_;
  // [out/in][counterpart type][category]
  std::array<std::array<std::array<std::string, kTokenCategoryCount>, 4>, 2> edge_keys_;
};

}  // namespace motifscope
