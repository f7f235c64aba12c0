#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "motifscope/core.hpp"

namespace motifscope {

/// One directed token movement inside a transaction. Account ids are
/// lowercased at load time.
struct TokenTransfer {
  std::string tx_hash;
  std::string ego_account;
  std::string from_account;
  std::string to_account;
  std::string token_contract;
  std::string token_symbol;
  std::string amount;  ///< original decimal text, validated nonnegative
  std::uint64_t block_number = 0;

  bool operator==(const TokenTransfer&) const = default;
};

struct TokenInfo {
  std::string contract;
  std::string symbol;
  TokenCategory category = TokenCategory::Unlabeled;
  bool is_spam = false;
};

/// Token metadata. Entries that declare a contract are matched by contract
/// only; entries without a contract are matched by symbol. Anything else
/// resolves to a non-spam Unlabeled token.
class TokenRegistry {
 public:
  void add(TokenInfo info);
  const TokenInfo* find(std::string_view contract, std::string_view symbol) const;
  TokenCategory category_of(std::string_view contract, std::string_view symbol) const;
  bool is_spam(std::string_view contract, std::string_view symbol) const;
  const std::vector<TokenInfo>& entries() const { return entries_; }

  static TokenRegistry from_json_file(const std::string& path);
  static TokenRegistry from_json_text(const std::string& text);
  std::string to_json_text() const;

 private:
  std::vector<TokenInfo> entries_;
  std::unordered_map<std::string, std::size_t> by_contract_;
  std::unordered_map<std::string, std::size_t> by_symbol_;
};

/// Declared account types. The all-zero address is always Null; the ego of
/// the transaction under analysis is always Ego; undeclared accounts are
/// Address.
class AccountRegistry {
 public:
  void declare(const std::string& account, AccountType type);
  AccountType type_in(std::string_view account, std::string_view ego) const;
  bool is_declared_ego(const std::string& account) const { return egos_.count(to_lower(account)) > 0; }
  std::size_t size() const { return declared_.size(); }

  static AccountRegistry from_json_file(const std::string& path);
  static AccountRegistry from_json_text(const std::string& text);
  std::string to_json_text() const;

 private:
  std::map<std::string, AccountType> declared_;
  std::unordered_set<std::string> egos_;
  std::unordered_map<std::string, AccountType> lookup_;
};

enum class RejectReason {
  MissingTxHash,
  MissingAccount,
  NegativeAmount,
  BadAmount,
  BadBlockNumber,
  SelfTransfer,
  ColumnCount,
};

std::string_view reject_reason_name(RejectReason r);

struct RowRejection {
  std::size_t line = 0;  ///< 1-based line number in the source file
  RejectReason reason;
};

struct TransferLoad {
  std::vector<TokenTransfer> transfers;
  std::vector<RowRejection> rejects;
};

/// Reads transfers.csv (header required, columns located by name).
/// Throws InputError when the file cannot be read or the header is missing
/// a required column.
TransferLoad load_transfers(const std::string& path, const TokenRegistry& registry);
TransferLoad parse_transfers(const std::string& csv_text, const TokenRegistry& registry);

struct MethodLabel {
  std::string tx_hash;
  std::string raw_method;
  MethodGroup method_group = MethodGroup::Unknown;
};

/// Normalized raw method name -> group. Built from the shipped default table
/// or from a method_groups.json object.
class MethodMapping {
 public:
  /// Throws ConfigError when the same normalized name maps to two groups.
  void add(std::string_view raw_method, MethodGroup group);
  MethodGroup lookup(std::string_view raw_method) const;
  std::size_t size() const { return table_.size(); }

  static MethodMapping defaults();
  static MethodMapping from_json_file(const std::string& path);
  static MethodMapping from_json_text(const std::string& text);
  std::string to_json_text() const;

 private:
  std::map<std::string, MethodGroup> table_;
  std::map<std::string, std::string> display_;
};

/// Raw names per group with at least 100 transactions in the reference
/// dataset, before merging.
const std::vector<std::pair<std::string, std::vector<std::string>>>& default_method_table();

std::vector<MethodLabel> load_method_labels(const std::string& path);
std::vector<MethodLabel> parse_method_labels(const std::string& csv_text);

/// Sets method_group on every label. Groups outside the eight selected ones
/// become Unknown.
void group_methods(std::vector<MethodLabel>& labels, const MethodMapping& mapping);

struct Transaction {
  std::string tx_hash;
  std::string ego_account;
  std::vector<TokenTransfer> transfers;
  std::optional<MethodGroup> method_group;  ///< nullopt: no label record
  std::string raw_method;
};

/// Partitions by (tx_hash, ego) in order of first appearance; transfer order
/// inside a transaction follows input order.
std::vector<Transaction> group_transactions(const std::vector<TokenTransfer>& transfers);

/// Removes every transaction that moves at least one spam token, and every
/// transaction left without transfers.
std::vector<Transaction> filter_spam(std::vector<Transaction> transactions, const TokenRegistry& registry);

/// Attaches grouped labels by tx_hash.
void attach_labels(std::vector<Transaction>& transactions, const std::vector<MethodLabel>& labels);

// --- normalized transaction store (one Transaction per JSON line) ---

std::string transaction_to_json_line(const Transaction& tx);
Transaction transaction_from_json_line(std::string_view line);

struct Store {
  std::vector<Transaction> transactions;
  AccountRegistry accounts;
  TokenRegistry tokens;
};

inline constexpr const char* kStoreTransactions = "transactions.jsonl";
inline constexpr const char* kStoreAccounts = "accounts.json";
inline constexpr const char* kStoreTokens = "tokens.json";
inline constexpr const char* kStoreLabels = "labels.csv";
inline constexpr const char* kStoreReport = "ingest_report.json";

struct IngestOptions {
  std::string transfers_path;
  std::string tokens_path;
  std::string accounts_path;
  std::string methods_path;        ///< optional
  std::string method_groups_path;  ///< optional; defaults to the shipped table
  std::string out_dir;
};

struct IngestSummary {
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::map<std::string, std::size_t> rejects_by_reason;
  std::size_t transactions_grouped = 0;
  std::size_t transactions_after_spam = 0;
  std::size_t labeled = 0;
};

/// Full ingest stage: load, group, spam-filter, label, write the store.
IngestSummary run_ingest(const IngestOptions& options);

Store load_store(const std::string& dir);
void write_store(const std::string& dir, const Store& store);

/// labels.csv: tx_hash,method_group (one row per labeled tx_hash).
std::string labels_csv(const std::vector<Transaction>& transactions);
std::unordered_map<std::string, MethodGroup> load_group_labels(const std::string& path);

}  // namespace motifscope
