#include "motifscope/core.hpp"

#include <algorithm>
#include <cctype>

namespace motifscope {

namespace {

constexpr std::array<std::string_view, kTokenCategoryCount> kCategoryNames = {
    "Cryptocurrency", "Stablecoin", "Marketplace", "Other",  "NFT & Metaverse",
    "Network",        "Financial Service", "Synthetic", "Bridge", "Unlabeled"};

constexpr std::array<std::string_view, 9> kGroupNames = {
    "Transfer", "Swap", "Withdraw", "Deposit", "Claim Reward", "Borrow", "Repay", "Mint", "Unknown"};

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

char account_letter(AccountType t) {
  switch (t) {
    case AccountType::Ego: return 'E';
    case AccountType::Address: return 'A';
    case AccountType::Contract: return 'C';
    case AccountType::Null: return 'N';
  }
  return '?';
}

std::optional<AccountType> parse_account_type(std::string_view s) {
  const std::string k = to_lower(s);
  if (k == "ego" || k == "e") return AccountType::Ego;
  if (k == "address" || k == "a") return AccountType::Address;
  if (k == "contract" || k == "c") return AccountType::Contract;
  if (k == "null" || k == "n") return AccountType::Null;
  return std::nullopt;
}

std::string_view category_name(TokenCategory c) {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<TokenCategory> parse_category(std::string_view s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == s) return static_cast<TokenCategory>(i);
  }
  return std::nullopt;
}

std::string_view group_name(MethodGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::optional<MethodGroup> parse_group(std::string_view s) {
  const std::string k = squash(s);
  for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
    if (squash(kGroupNames[i]) == k) return static_cast<MethodGroup>(i);
  }
  if (k == "exchange") return MethodGroup::Swap;
  if (k == "redeem") return MethodGroup::Withdraw;
  if (k == "exit" || k == "burn" || k == "stake") return MethodGroup::Unknown;
  return std::nullopt;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string normalize_name(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_null_address(std::string_view account) {
  if (account.size() < 3 || account[0] != '0' || (account[1] != 'x' && account[1] != 'X')) return false;
  return std::all_of(account.begin() + 2, account.end(), [](char c) { return c == '0'; });
}

}  // namespace motifscope
