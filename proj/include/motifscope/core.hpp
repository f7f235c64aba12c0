#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace motifscope {

/// Malformed or missing input data (exit code 2 at the CLI).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent configuration such as conflicting mapping entries.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AccountType : std::uint8_t { Ego = 0, Address = 1, Contract = 2, Null = 3 };

/// Single-letter code used in feature keys: E, A, C, N.
char account_letter(AccountType t);
std::optional<AccountType> parse_account_type(std::string_view s);

enum class TokenCategory : std::uint8_t {
  Cryptocurrency = 0,
  Stablecoin,
  Marketplace,
  Other,
  NftMetaverse,
  Network,
  FinancialService,
  Synthetic,
  Bridge,
  Unlabeled,
};

inline constexpr std::size_t kTokenCategoryCount = 10;

std::string_view category_name(TokenCategory c);
std::optional<TokenCategory> parse_category(std::string_view s);

enum class MethodGroup : std::uint8_t {
  Transfer = 0,
  Swap,
  Withdraw,
  Deposit,
  ClaimReward,
  Borrow,
  Repay,
  Mint,
  Unknown,
};

/// The eight groups used as classification targets, in class-index order.
inline constexpr std::array<MethodGroup, 8> kSelectedGroups = {
    MethodGroup::Transfer, MethodGroup::Swap,   MethodGroup::Withdraw, MethodGroup::Deposit,
    MethodGroup::ClaimReward, MethodGroup::Borrow, MethodGroup::Repay,  MethodGroup::Mint};

std::string_view group_name(MethodGroup g);

/// Accepts the canonical names plus the merged/excluded Table-style names
/// (Exchange, Redeem, Exit, Burn, Stake); comparison ignores case and spaces.
std::optional<MethodGroup> parse_group(std::string_view s);

/// Lowercase, trim, collapse internal whitespace runs to one space.
std::string normalize_name(std::string_view s);
std::string to_lower(std::string_view s);

/// "0x" followed only by zeros.
bool is_null_address(std::string_view account);

inline constexpr std::string_view kVersion = "0.3.0";

}  // namespace motifscope
