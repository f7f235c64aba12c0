#include "motifscope/etn.hpp"

#include <algorithm>
#include <sstream>

namespace motifscope {

EgoTransferNetwork::EgoTransferNetwork(std::string ego_account) {
  accounts_.push_back(std::move(ego_account));
  types_.push_back(AccountType::Ego);
  states_.push_back(kStateNone);
}

namespace {
constexpr std::size_t kLinearScanLimit = 32;
}

std::uint32_t EgoTransferNetwork::find(std::string_view account) const {
  if (!index_.empty()) {
    auto it = index_.find(std::string(account));
    return it == index_.end() ? npos : it->second;
  }
  for (std::size_t i = 0; i < accounts_.size(); ++i) {
    if (accounts_[i] == account) return static_cast<std::uint32_t>(i);
  }
  return npos;
}

std::uint32_t EgoTransferNetwork::add_node(std::string_view account, AccountType type) {
  if (const auto idx = find(account); idx != npos) return idx;
  accounts_.emplace_back(account);
  // Exactly one Ego node per network.
  types_.push_back(type == AccountType::Ego ? AccountType::Address : type);
  states_.push_back(kStateNone);
  const auto idx = static_cast<std::uint32_t>(accounts_.size() - 1);
  if (!index_.empty()) {
    index_.emplace(accounts_.back(), idx);
  } else if (accounts_.size() > kLinearScanLimit) {
    for (std::uint32_t i = 0; i < accounts_.size(); ++i) index_.emplace(accounts_[i], i);
  }
  return idx;
}

bool EgoTransferNetwork::add_edge(std::uint32_t source, std::uint32_t target, TokenCategory category) {
  if (source == target || (source != 0 && target != 0)) return false;
  edges_.push_back({source, target, category});
  if (source == 0) {
    states_[target] |= kStateOut;
  } else {
    states_[source] |= kStateIn;
  }
  return true;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> EgoTransferNetwork::simple_view() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t n = 1; n < states_.size(); ++n) {
    if (states_[n] & kStateOut) pairs.emplace_back(0u, n);
    if (states_[n] & kStateIn) pairs.emplace_back(n, 0u);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

EtnBuild build_etn(const Transaction& tx, const AccountRegistry& accounts, const TokenRegistry& tokens) {
  EtnBuild out{EgoTransferNetwork(tx.ego_account), {}};
  auto& g = out.network;
  for (std::size_t i = 0; i < tx.transfers.size(); ++i) {
    const auto& t = tx.transfers[i];
    if (t.from_account != tx.ego_account && t.to_account != tx.ego_account) {
      out.rejected_transfers.push_back(i);
      continue;
    }
    if (t.from_account == t.to_account) {
      out.rejected_transfers.push_back(i);
      continue;
    }
    const auto s = g.add_node(t.from_account, accounts.type_in(t.from_account, tx.ego_account));
    const auto d = g.add_node(t.to_account, accounts.type_in(t.to_account, tx.ego_account));
    g.add_edge(s, d, tokens.category_of(t.token_contract, t.token_symbol));
  }
  return out;
}

std::string etn_to_dot(const EgoTransferNetwork& etn, std::string_view title) {
  auto shape = [](AccountType t) {
    switch (t) {
      case AccountType::Ego: return "doublecircle";
      case AccountType::Address: return "ellipse";
      case AccountType::Contract: return "box";
      case AccountType::Null: return "diamond";
    }
    return "ellipse";
  };
  std::ostringstream os;
  os << "digraph etn {\n";
  if (!title.empty()) os << "  label=\"" << title << "\";\n";
  for (std::uint32_t n = 0; n < etn.node_count(); ++n) {
    os << "  n" << n << " [shape=" << shape(etn.type(n)) << ", label=\"" << account_letter(etn.type(n)) << "\\n"
       << etn.account(n) << "\"];\n";
  }
  for (const auto& e : etn.edges()) {
    os << "  n" << e.source << " -> n" << e.target << " [label=\"" << category_name(e.category) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace motifscope
