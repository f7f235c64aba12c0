#include "motifscope/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- tokens

void TokenRegistry::add(TokenInfo info) {
  info.contract = to_lower(info.contract);
  if (info.is_spam) info.category = TokenCategory::Unlabeled;
  const std::size_t idx = entries_.size();
  if (!info.contract.empty()) {
    if (!by_contract_.emplace(info.contract, idx).second) {
      throw ConfigError("duplicate token contract: " + info.contract);
    }
  } else {
    if (info.symbol.empty()) throw ConfigError("token entry needs a contract or a symbol");
    if (!by_symbol_.emplace(info.symbol, idx).second) {
      throw ConfigError("duplicate contract-less token symbol: " + info.symbol);
    }
  }
  entries_.push_back(std::move(info));
}

const TokenInfo* TokenRegistry::find(std::string_view contract, std::string_view symbol) const {
  if (!contract.empty()) {
    if (auto it = by_contract_.find(std::string(contract)); it != by_contract_.end()) {
      return &entries_[it->second];
    }
  }
  if (auto it = by_symbol_.find(std::string(symbol)); it != by_symbol_.end()) {
    return &entries_[it->second];
  }
  return nullptr;
}

TokenCategory TokenRegistry::category_of(std::string_view contract, std::string_view symbol) const {
  const TokenInfo* info = find(contract, symbol);
  return info ? info->category : TokenCategory::Unlabeled;
}

bool TokenRegistry::is_spam(std::string_view contract, std::string_view symbol) const {
  const TokenInfo* info = find(contract, symbol);
  return info && info->is_spam;
}

TokenRegistry TokenRegistry::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("tokens.json: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("tokens.json: expected an array");
  TokenRegistry reg;
  for (const auto& item : doc) {
    if (!item.is_object()) throw InputError("tokens.json: entries must be objects");
    TokenInfo info;
    info.contract = item.value("contract", std::string{});
    info.symbol = item.value("symbol", std::string{});
    info.is_spam = item.value("is_spam", false);
    std::string cat;
    if (item.contains("category") && item["category"].is_string()) cat = item["category"].get<std::string>();
    if (info.is_spam) {
      if (!cat.empty()) {
        throw ConfigError("tokens.json: spam token " + info.symbol + " must not carry a category");
      }
    } else {
      if (cat.empty()) cat = "Unlabeled";
      auto parsed = parse_category(cat);
      if (!parsed) throw ConfigError("tokens.json: unknown token category \"" + cat + "\"");
      info.category = *parsed;
    }
    reg.add(std::move(info));
  }
  return reg;
}

TokenRegistry TokenRegistry::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

std::string TokenRegistry::to_json_text() const {
  json arr = json::array();
  for (const auto& e : entries_) {
    json item = {{"contract", e.contract}, {"symbol", e.symbol}, {"is_spam", e.is_spam}};
    item["category"] = e.is_spam ? json(nullptr) : json(std::string(category_name(e.category)));
    arr.push_back(std::move(item));
  }
  return arr.dump(1) + "\n";
}

// ---------------------------------------------------------------- accounts

void AccountRegistry::declare(const std::string& account, AccountType type) {
  const std::string key = to_lower(account);
  declared_[key] = type;
  if (type == AccountType::Ego) egos_.insert(key);
  lookup_[key] = type;
}

AccountType AccountRegistry::type_in(std::string_view account, std::string_view ego) const {
  if (account == ego) return AccountType::Ego;
  if (is_null_address(account)) return AccountType::Null;
  auto it = lookup_.find(std::string(account));
  if (it == lookup_.end()) return AccountType::Address;
  // Another ego appearing as a counterpart is an ordinary address here.
  return it->second == AccountType::Ego ? AccountType::Address : it->second;
}

AccountRegistry AccountRegistry::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("accounts.json: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("accounts.json: expected an array");
  AccountRegistry reg;
  for (const auto& item : doc) {
    const std::string address = item.value("address", std::string{});
    const std::string type = item.value("type", std::string{});
    auto parsed = parse_account_type(type);
    if (address.empty() || !parsed) throw InputError("accounts.json: bad entry " + item.dump());
    reg.declare(address, *parsed);
  }
  return reg;
}

AccountRegistry AccountRegistry::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

std::string AccountRegistry::to_json_text() const {
  static constexpr const char* kNames[] = {"ego", "address", "contract", "null"};
  json arr = json::array();
  for (const auto& [address, type] : declared_) {
    arr.push_back({{"address", address}, {"type", kNames[static_cast<int>(type)]}});
  }
  return arr.dump(1) + "\n";
}

// ---------------------------------------------------------------- transfers

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::MissingTxHash: return "missing_tx_hash";
    case RejectReason::MissingAccount: return "missing_account";
    case RejectReason::NegativeAmount: return "negative_amount";
    case RejectReason::BadAmount: return "bad_amount";
    case RejectReason::BadBlockNumber: return "bad_block_number";
    case RejectReason::SelfTransfer: return "self_transfer";
    case RejectReason::ColumnCount: return "column_count";
  }
  return "unknown";
}

namespace {

std::optional<RejectReason> check_amount(std::string_view text) {
  std::string trimmed(text);
  trimmed.erase(0, trimmed.find_first_not_of(" \t"));
  trimmed.erase(trimmed.find_last_not_of(" \t") + 1);
  if (trimmed.empty()) return RejectReason::BadAmount;
  char* end = nullptr;
  const double v = std::strtod(trimmed.c_str(), &end);
  if (end != trimmed.c_str() + trimmed.size() || std::isnan(v)) return RejectReason::BadAmount;
  if (v < 0 || trimmed.front() == '-') return v == 0 ? std::nullopt : std::optional(RejectReason::NegativeAmount);
  return std::nullopt;
}

}  // namespace

TransferLoad parse_transfers(const std::string& csv_text, const TokenRegistry& /*registry*/) {
  static constexpr std::array<const char*, 8> kColumns = {"tx_hash", "ego", "from", "to", "token_contract",
                                                          "token_symbol", "amount", "block_number"};
  TransferLoad out;
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("transfers.csv: missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_csv_line(line);
  std::array<std::size_t, 8> pos{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) throw InputError(std::string("transfers.csv: header lacks column ") + kColumns[c]);
    pos[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      out.rejects.push_back({lineno, RejectReason::ColumnCount});
      continue;
    }
    TokenTransfer t;
    t.tx_hash = f[pos[0]];
    t.ego_account = to_lower(f[pos[1]]);
    t.from_account = to_lower(f[pos[2]]);
    t.to_account = to_lower(f[pos[3]]);
    t.token_contract = to_lower(f[pos[4]]);
    t.token_symbol = f[pos[5]];
    t.amount = f[pos[6]];
    if (t.tx_hash.empty()) {
      out.rejects.push_back({lineno, RejectReason::MissingTxHash});
      continue;
    }
    if (t.ego_account.empty() || t.from_account.empty() || t.to_account.empty()) {
      out.rejects.push_back({lineno, RejectReason::MissingAccount});
      continue;
    }
    if (auto bad = check_amount(t.amount)) {
      out.rejects.push_back({lineno, *bad});
      continue;
    }
    const std::string& block = f[pos[7]];
    auto [ptr, ec] = std::from_chars(block.data(), block.data() + block.size(), t.block_number);
    if (block.empty() || ec != std::errc() || ptr != block.data() + block.size()) {
      out.rejects.push_back({lineno, RejectReason::BadBlockNumber});
      continue;
    }
    if (t.from_account == t.to_account) {
      out.rejects.push_back({lineno, RejectReason::SelfTransfer});
      continue;
    }
    out.transfers.push_back(std::move(t));
  }
  return out;
}

TransferLoad load_transfers(const std::string& path, const TokenRegistry& registry) {
  return parse_transfers(read_file(path), registry);
}

// ---------------------------------------------------------------- methods

const std::vector<std::pair<std::string, std::vector<std::string>>>& default_method_table() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kTable = {
      {"Transfer", {"Complete Transfer", "Safe Transfer From", "Transfer", "Transfer From", "Transfer Tokens"}},
      {"Swap",
       {"Any Swap Out Underlying", "Batch Eth Out Swap Exact In", "Exact Input Single", "Simple Swap", "Swap",
        "Swap ETH For Exact Tokens", "Swap Erc20", "Swap Exact ETH For Tokens", "Swap Exact Tokens For ETH",
        "Swap Exact Tokens For Tokens", "Uniswap V3Swap"}},
      {"Exchange", {"Exchange", "Exchange underlying"}},
      {"Withdraw", {"Remove Liquidity ETH With Permit", "Remove liquidity one coin", "Withdraw", "Withdraw Erc20"}},
      {"Redeem", {"Redeem", "Redeem Underlying"}},
      {"Deposit", {"Add Liquidity", "Add Liquidity ETH", "Deposit", "Deposit ETH", "Deposit For"}},
      {"Claim Reward", {"Claim", "Claim Comp", "Claim Reward", "Claim Rewards", "Claim Token", "Get Reward"}},
      {"Borrow", {"Borrow"}},
      {"Repay", {"Repay", "Repay Borrow"}},
      {"Mint", {"Mint", "Mint many"}},
      {"Exit", {"Exit"}},
      {"Burn", {"Burn"}},
      {"Stake", {"Stake"}},
  };
  return kTable;
}

void MethodMapping::add(std::string_view raw_method, MethodGroup group) {
  const std::string key = normalize_name(raw_method);
  auto [it, inserted] = table_.emplace(key, group);
  if (!inserted && it->second != group) {
    throw ConfigError("conflicting method mapping for \"" + std::string(raw_method) + "\": " +
                      std::string(group_name(it->second)) + " vs " + std::string(group_name(group)));
  }
  display_.emplace(key, std::string(raw_method));
}

MethodGroup MethodMapping::lookup(std::string_view raw_method) const {
  auto it = table_.find(normalize_name(raw_method));
  if (it == table_.end()) return MethodGroup::Unknown;
  return it->second;
}

MethodMapping MethodMapping::defaults() {
  MethodMapping m;
  for (const auto& [group, names] : default_method_table()) {
    const auto g = parse_group(group);
    for (const auto& n : names) m.add(n, *g);
  }
  return m;
}

MethodMapping MethodMapping::from_json_text(const std::string& text) {
  // The callback sees every key/value pair, including exact duplicates that
  // a plain parse would silently collapse.
  std::vector<std::pair<std::string, json>> pairs;
  std::string pending_key;
  json::parser_callback_t cb = [&](int depth, json::parse_event_t event, json& parsed) {
    if (depth == 1 && event == json::parse_event_t::key) pending_key = parsed.get<std::string>();
    if (depth == 1 && event == json::parse_event_t::value) pairs.emplace_back(pending_key, parsed);
    return true;
  };
  json doc;
  try {
    doc = json::parse(text, cb);
  } catch (const json::exception& e) {
    throw InputError(std::string("method_groups.json: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("method_groups.json: expected an object {raw_method: group}");
  MethodMapping m;
  for (const auto& [raw, value] : pairs) {
    if (!value.is_string()) throw ConfigError("method_groups.json: group for \"" + raw + "\" must be a string");
    const auto g = parse_group(value.get<std::string>());
    if (!g) throw ConfigError("method_groups.json: unknown group \"" + value.get<std::string>() + "\"");
    m.add(raw, *g);
  }
  return m;
}

MethodMapping MethodMapping::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

std::string MethodMapping::to_json_text() const {
  json obj = json::object();
  for (const auto& [key, group] : table_) obj[display_.at(key)] = std::string(group_name(group));
  return obj.dump(1) + "\n";
}

std::vector<MethodLabel> parse_method_labels(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("methods.csv: missing header row");
  const auto header = split_csv_line(line);
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(std::string("methods.csv: header lacks column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t h = col("tx_hash");
  const std::size_t r = col("raw_method");
  std::vector<MethodLabel> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size() || f[h].empty()) continue;
    out.push_back({f[h], f[r], MethodGroup::Unknown});
  }
  return out;
}

std::vector<MethodLabel> load_method_labels(const std::string& path) { return parse_method_labels(read_file(path)); }

void group_methods(std::vector<MethodLabel>& labels, const MethodMapping& mapping) {
  for (auto& l : labels) {
    const MethodGroup g = mapping.lookup(l.raw_method);
    const bool selected = std::find(kSelectedGroups.begin(), kSelectedGroups.end(), g) != kSelectedGroups.end();
    l.method_group = selected ? g : MethodGroup::Unknown;
  }
}

// ---------------------------------------------------------------- grouping

std::vector<Transaction> group_transactions(const std::vector<TokenTransfer>& transfers) {
  std::vector<Transaction> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : transfers) {
    std::string key = t.tx_hash;
    key.push_back('\x1f');
    key += t.ego_account;
    auto [it, inserted] = index.emplace(std::move(key), out.size());
    if (inserted) {
      Transaction tx;
      tx.tx_hash = t.tx_hash;
      tx.ego_account = t.ego_account;
      out.push_back(std::move(tx));
    }
    out[it->second].transfers.push_back(t);
  }
  return out;
}

std::vector<Transaction> filter_spam(std::vector<Transaction> transactions, const TokenRegistry& registry) {
  std::erase_if(transactions, [&](const Transaction& tx) {
    if (tx.transfers.empty()) return true;
    return std::any_of(tx.transfers.begin(), tx.transfers.end(), [&](const TokenTransfer& t) {
      return registry.is_spam(t.token_contract, t.token_symbol);
    });
  });
  return transactions;
}

void attach_labels(std::vector<Transaction>& transactions, const std::vector<MethodLabel>& labels) {
  std::unordered_map<std::string, const MethodLabel*> by_hash;
  for (const auto& l : labels) by_hash.emplace(l.tx_hash, &l);
  for (auto& tx : transactions) {
    if (auto it = by_hash.find(tx.tx_hash); it != by_hash.end()) {
      tx.method_group = it->second->method_group;
      tx.raw_method = it->second->raw_method;
    }
  }
}

// ---------------------------------------------------------------- store

std::string transaction_to_json_line(const Transaction& tx) {
  json transfers = json::array();
  for (const auto& t : tx.transfers) {
    transfers.push_back({{"from", t.from_account},
                         {"to", t.to_account},
                         {"token_contract", t.token_contract},
                         {"token_symbol", t.token_symbol},
                         {"amount", t.amount},
                         {"block_number", t.block_number}});
  }
  json j = {{"tx_hash", tx.tx_hash}, {"ego", tx.ego_account}};
  j["method_group"] = tx.method_group ? json(std::string(group_name(*tx.method_group))) : json(nullptr);
  j["raw_method"] = tx.raw_method;
  j["transfers"] = std::move(transfers);
  return j.dump();
}

Transaction transaction_from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(std::string("transaction store: ") + e.what());
  }
  Transaction tx;
  tx.tx_hash = j.at("tx_hash").get<std::string>();
  tx.ego_account = j.at("ego").get<std::string>();
  if (j.contains("method_group") && j["method_group"].is_string()) {
    tx.method_group = parse_group(j["method_group"].get<std::string>());
  }
  tx.raw_method = j.value("raw_method", std::string{});
  for (const auto& t : j.at("transfers")) {
    TokenTransfer tr;
    tr.tx_hash = tx.tx_hash;
    tr.ego_account = tx.ego_account;
    tr.from_account = t.at("from").get<std::string>();
    tr.to_account = t.at("to").get<std::string>();
    tr.token_contract = t.value("token_contract", std::string{});
    tr.token_symbol = t.value("token_symbol", std::string{});
    tr.amount = t.value("amount", std::string{"0"});
    tr.block_number = t.value("block_number", std::uint64_t{0});
    tx.transfers.push_back(std::move(tr));
  }
  return tx;
}

std::string labels_csv(const std::vector<Transaction>& transactions) {
  std::string out = "tx_hash,method_group\n";
  std::unordered_set<std::string> seen;
  for (const auto& tx : transactions) {
    if (!tx.method_group || !seen.insert(tx.tx_hash).second) continue;
    out += csv_escape(tx.tx_hash);
    out.push_back(',');
    out += csv_escape(group_name(*tx.method_group));
    out.push_back('\n');
  }
  return out;
}

std::unordered_map<std::string, MethodGroup> load_group_labels(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InputError("labels file is empty: " + path);
  const auto header = split_csv_line(line);
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InputError(std::string("labels file lacks column ") + name + ": " + path);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t h = col("tx_hash");
  const std::size_t g = col("method_group");
  std::unordered_map<std::string, MethodGroup> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size()) continue;
    auto parsed = parse_group(f[g]);
    if (!parsed) throw InputError("labels file: unknown method group \"" + f[g] + "\"");
    out[f[h]] = *parsed;
  }
  return out;
}

void write_store(const std::string& dir, const Store& store) {
  fs::create_directories(dir);
  std::string body;
  for (const auto& tx : store.transactions) {
    body += transaction_to_json_line(tx);
    body.push_back('\n');
  }
  write_file((fs::path(dir) / kStoreTransactions).string(), body);
  write_file((fs::path(dir) / kStoreAccounts).string(), store.accounts.to_json_text());
  write_file((fs::path(dir) / kStoreTokens).string(), store.tokens.to_json_text());
  write_file((fs::path(dir) / kStoreLabels).string(), labels_csv(store.transactions));
}

Store load_store(const std::string& dir) {
  Store store;
  const fs::path base(dir);
  if (!fs::is_directory(base)) throw InputError("not a transaction store directory: " + dir);
  std::ifstream in(base / kStoreTransactions);
  if (!in) throw InputError("store lacks " + std::string(kStoreTransactions) + ": " + dir);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) store.transactions.push_back(transaction_from_json_line(line));
  }
  store.accounts = AccountRegistry::from_json_file((base / kStoreAccounts).string());
  store.tokens = TokenRegistry::from_json_file((base / kStoreTokens).string());
  return store;
}

IngestSummary run_ingest(const IngestOptions& options) {
  Store store;
  store.tokens = TokenRegistry::from_json_file(options.tokens_path);
  store.accounts = AccountRegistry::from_json_file(options.accounts_path);
  const MethodMapping mapping = options.method_groups_path.empty()
                                    ? MethodMapping::defaults()
                                    : MethodMapping::from_json_file(options.method_groups_path);

  TransferLoad load = load_transfers(options.transfers_path, store.tokens);
  IngestSummary summary;
  summary.rows_accepted = load.transfers.size();
  summary.rows_rejected = load.rejects.size();
  for (const auto& r : load.rejects) ++summary.rejects_by_reason[std::string(reject_reason_name(r.reason))];

  for (const auto& t : load.transfers) {
    if (!store.accounts.is_declared_ego(t.ego_account)) store.accounts.declare(t.ego_account, AccountType::Ego);
  }
  auto grouped = group_transactions(load.transfers);
  summary.transactions_grouped = grouped.size();
  store.transactions = filter_spam(std::move(grouped), store.tokens);
  summary.transactions_after_spam = store.transactions.size();

  if (!options.methods_path.empty()) {
    auto labels = load_method_labels(options.methods_path);
    group_methods(labels, mapping);
    attach_labels(store.transactions, labels);
  }
  summary.labeled = static_cast<std::size_t>(std::count_if(
      store.transactions.begin(), store.transactions.end(), [](const Transaction& tx) {
        return tx.method_group && *tx.method_group != MethodGroup::Unknown;
      }));

  write_store(options.out_dir, store);

  json report = {{"rows_accepted", summary.rows_accepted},
                 {"rows_rejected", summary.rows_rejected},
                 {"rejects_by_reason", summary.rejects_by_reason},
                 {"transactions_grouped", summary.transactions_grouped},
                 {"transactions_after_spam_filter", summary.transactions_after_spam},
                 {"labeled_selected_groups", summary.labeled}};
  json rejects = json::array();
  for (const auto& r : load.rejects) rejects.push_back({{"line", r.line}, {"reason", reject_reason_name(r.reason)}});
  report["rejects"] = std::move(rejects);
  write_file((fs::path(options.out_dir) / kStoreReport).string(), report.dump(1) + "\n");
  return summary;
}

}  // namespace motifscope
