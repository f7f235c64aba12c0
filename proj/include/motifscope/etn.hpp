#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "motifscope/core.hpp"
#include "motifscope/ingest.hpp"

namespace motifscope {

/// Directed pair state between the ego and one neighbor in the collapsed
/// simple view. Bit 0: ego -> neighbor, bit 1: neighbor -> ego.
enum PairState : std::uint8_t { kStateNone = 0, kStateOut = 1, kStateIn = 2, kStateBoth = 3 };

struct EtnEdge {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  TokenCategory category = TokenCategory::Unlabeled;
};

/// Ego transfer network of one transaction. Node 0 is always the ego; all
/// edges touch it. Parallel edges are kept.
class EgoTransferNetwork {
 public:
  EgoTransferNetwork() = default;
  explicit EgoTransferNetwork(std::string ego_account);

  /// Returns the node index, adding the node on first sight.
  std::uint32_t add_node(std::string_view account, AccountType type);
  /// Returns false (and adds nothing) when neither endpoint is the ego or
  /// when source == target.
  bool add_edge(std::uint32_t source, std::uint32_t target, TokenCategory category);

  const std::string& ego() const { return accounts_.front(); }
  std::size_t node_count() const { return accounts_.size(); }
  const std::string& account(std::uint32_t node) const { return accounts_[node]; }
  AccountType type(std::uint32_t node) const { return types_[node]; }
  const std::vector<EtnEdge>& edges() const { return edges_; }

  /// Pair state of a non-ego node in the collapsed view.
  std::uint8_t state(std::uint32_t node) const { return states_[node]; }

  /// Distinct (source, target) pairs, sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> simple_view() const;

  std::uint32_t find(std::string_view account) const;
  static constexpr std::uint32_t npos = 0xFFFFFFFFu;

 private:
  std::vector<std::string> accounts_;
  std::vector<AccountType> types_;
  std::vector<std::uint8_t> states_;
  std::vector<EtnEdge> edges_;
  std::unordered_map<std::string, std::uint32_t> index_;  // filled once the node list grows large
};

struct EtnBuild {
  EgoTransferNetwork network;
  /// Indices (into tx.transfers) of transfers that do not touch the ego.
  std::vector<std::size_t> rejected_transfers;
};

EtnBuild build_etn(const Transaction& tx, const AccountRegistry& accounts, const TokenRegistry& tokens);

/// Graphviz rendering: node shape by account type, edge label = category.
std::string etn_to_dot(const EgoTransferNetwork& etn, std::string_view title = {});

}  // namespace motifscope
