#include <doctest.h>

#include <filesystem>

#include "motifscope/ingest.hpp"
#include "motifscope/util.hpp"

using namespace motifscope;

namespace {

const char* kHeader = "tx_hash,ego,from,to,token_contract,token_symbol,amount,block_number\n";

TokenRegistry sample_tokens() {
  return TokenRegistry::from_json_text(R"([
    {"contract": "0xUSDT", "symbol": "USDT", "category": "Stablecoin", "is_spam": false},
    {"contract": "0xspam", "symbol": "USDT", "category": null, "is_spam": true},
    {"contract": "", "symbol": "ETH", "category": "Cryptocurrency", "is_spam": false}
  ])");
}

}  // namespace

TEST_CASE("load_transfers: one valid row") {
  auto load = parse_transfers(std::string(kHeader) + "0xh1,0xE,0xE,0xC,0xusdt,USDT,1.5,10\n", sample_tokens());
  CHECK(load.transfers.size() == 1);
  CHECK(load.rejects.empty());
  CHECK(load.transfers[0].from_account == "0xe");
  CHECK(load.transfers[0].amount == "1.5");
}

TEST_CASE("load_transfers: negative amount is a per-row rejection") {
  auto load = parse_transfers(std::string(kHeader) +
                                  "0xh1,0xe,0xe,0xc,0xusdt,USDT,1,10\n"
                                  "0xh2,0xe,0xe,0xc,0xusdt,USDT,-3,11\n",
                              sample_tokens());
  CHECK(load.transfers.size() == 1);
  REQUIRE(load.rejects.size() == 1);
  CHECK(load.rejects[0].reason == RejectReason::NegativeAmount);
  CHECK(load.rejects[0].line == 3);
}

TEST_CASE("load_transfers: rejection reasons") {
  auto load = parse_transfers(std::string(kHeader) +
                                  ",0xe,0xe,0xc,,ETH,1,1\n"
                                  "0xh,0xe,,0xc,,ETH,1,1\n"
                                  "0xh,0xe,0xe,0xe,,ETH,1,1\n"
                                  "0xh,0xe,0xe,0xc,,ETH,abc,1\n"
                                  "0xh,0xe,0xe,0xc,,ETH,1,x\n"
                                  "0xh,0xe,0xe\n"
                                  "0xh,0xe,0xe,0xc,,\"ETH\",\"1,000\",1\n",
                              sample_tokens());
  REQUIRE(load.rejects.size() == 7);
  CHECK(load.rejects[0].reason == RejectReason::MissingTxHash);
  CHECK(load.rejects[1].reason == RejectReason::MissingAccount);
  CHECK(load.rejects[2].reason == RejectReason::SelfTransfer);
  CHECK(load.rejects[3].reason == RejectReason::BadAmount);
  CHECK(load.rejects[4].reason == RejectReason::BadBlockNumber);
  CHECK(load.rejects[5].reason == RejectReason::ColumnCount);
  CHECK(load.rejects[6].reason == RejectReason::BadAmount);
}

TEST_CASE("load_transfers: header column order is free, missing column is fatal") {
  auto load = parse_transfers("amount,block_number,tx_hash,ego,from,to,token_contract,token_symbol\n"
                              "2,5,0xh,0xe,0xa,0xe,,ETH\n",
                              sample_tokens());
  REQUIRE(load.transfers.size() == 1);
  CHECK(load.transfers[0].block_number == 5);
  CHECK_THROWS_AS(parse_transfers("tx_hash,ego,from\n", sample_tokens()), InputError);
  CHECK_THROWS_AS(load_transfers("/nonexistent/transfers.csv", sample_tokens()), InputError);
}

TEST_CASE("token registry: contract first, symbol fallback only for contract-less entries") {
  auto reg = sample_tokens();
  CHECK(reg.category_of("0xusdt", "USDT") == TokenCategory::Stablecoin);
  CHECK(reg.is_spam("0xspam", "USDT"));
  // Unknown contract carrying a known symbol is not resolved by symbol.
  CHECK(reg.category_of("0xother", "USDT") == TokenCategory::Unlabeled);
  CHECK_FALSE(reg.is_spam("0xother", "USDT"));
  CHECK(reg.category_of("", "ETH") == TokenCategory::Cryptocurrency);
  CHECK(reg.category_of("0xweird", "ETH") == TokenCategory::Cryptocurrency);
  CHECK_THROWS_AS(TokenRegistry::from_json_text(R"([{"contract":"0x1","symbol":"X","category":"Meme"}])"),
                  ConfigError);
  CHECK_THROWS_AS(TokenRegistry::from_json_text(R"([{"contract":"0x1","symbol":"X","category":"Stablecoin","is_spam":true}])"),
                  ConfigError);
}

TEST_CASE("account registry: null precedence, ego, default address") {
  auto reg = AccountRegistry::from_json_text(R"([
    {"address": "0xC1", "type": "contract"},
    {"address": "0x0000000000000000000000000000000000000000", "type": "contract"},
    {"address": "0xE2", "type": "ego"}])");
  CHECK(reg.type_in("0xc1", "0xe") == AccountType::Contract);
  CHECK(reg.type_in("0x0000000000000000000000000000000000000000", "0xe") == AccountType::Null);
  CHECK(reg.type_in("0xe", "0xe") == AccountType::Ego);
  CHECK(reg.type_in("0xe2", "0xe") == AccountType::Address);
  CHECK(reg.type_in("0xunknown", "0xe") == AccountType::Address);
}

TEST_CASE("group_methods: merged and excluded groups") {
  auto mapping = MethodMapping::defaults();
  std::vector<MethodLabel> labels = {{"1", "Exchange underlying", {}}, {"2", "Redeem Underlying", {}},
                                     {"3", "Stake", {}},               {"4", "Frobnicate", {}},
                                     {"5", "swap  exact tokens for tokens", {}}, {"6", "Claim Rewards", {}}};
  group_methods(labels, mapping);
  CHECK(labels[0].method_group == MethodGroup::Swap);
  CHECK(labels[1].method_group == MethodGroup::Withdraw);
  CHECK(labels[2].method_group == MethodGroup::Unknown);
  CHECK(labels[3].method_group == MethodGroup::Unknown);
  CHECK(labels[4].method_group == MethodGroup::Swap);
  CHECK(labels[5].method_group == MethodGroup::ClaimReward);
}

TEST_CASE("method mapping: conflicts are fatal, duplicates with the same group are fine") {
  CHECK_THROWS_AS(MethodMapping::from_json_text(R"({"Swap": "Swap", "Swap": "Mint"})"), ConfigError);
  CHECK_THROWS_AS(MethodMapping::from_json_text(R"({"Swap": "Swap", "swap": "Mint"})"), ConfigError);
  CHECK_NOTHROW(MethodMapping::from_json_text(R"({"Swap": "Swap", "swap": "Exchange"})"));
  CHECK_THROWS_AS(MethodMapping::from_json_text(R"({"Swap": "Teleport"})"), ConfigError);
  auto m = MethodMapping::from_json_text(MethodMapping::defaults().to_json_text());
  CHECK(m.lookup("Repay Borrow") == MethodGroup::Repay);
  CHECK(m.size() == MethodMapping::defaults().size());
}

TEST_CASE("method grouping is a pure function of the mapping") {
  auto labels = parse_method_labels("tx_hash,raw_method\na,Deposit ETH\nb,Burn\nc,Mint many\n");
  auto again = labels;
  group_methods(labels, MethodMapping::defaults());
  group_methods(again, MethodMapping::from_json_text(MethodMapping::defaults().to_json_text()));
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i].method_group == again[i].method_group);
}

TEST_CASE("group_transactions: partition by (tx_hash, ego), order preserved") {
  auto load = parse_transfers(std::string(kHeader) +
                                  "0xh1,0xe,0xe,0xa,,ETH,1,1\n"
                                  "0xh2,0xe,0xb,0xe,,ETH,2,1\n"
                                  "0xh1,0xe,0xc,0xe,,ETH,3,1\n"
                                  "0xh1,0xf,0xe,0xf,,ETH,3,1\n",
                              sample_tokens());
  auto txs = group_transactions(load.transfers);
  REQUIRE(txs.size() == 3);
  CHECK(txs[0].tx_hash == "0xh1");
  REQUIRE(txs[0].transfers.size() == 2);
  CHECK(txs[0].transfers[0].amount == "1");
  CHECK(txs[0].transfers[1].amount == "3");
  CHECK(txs[2].ego_account == "0xf");
  std::size_t total = 0;
  for (const auto& t : txs) total += t.transfers.size();
  CHECK(total == load.transfers.size());
  CHECK(group_transactions({}).empty());
}

TEST_CASE("filter_spam: transaction-level removal, idempotent") {
  auto reg = sample_tokens();
  auto load = parse_transfers(std::string(kHeader) +
                                  "0xh1,0xe,0xe,0xa,0xusdt,USDT,1,1\n"
                                  "0xh1,0xe,0xa,0xe,0xspam,USDT,1,1\n"
                                  "0xh2,0xe,0xe,0xa,0xusdt,USDT,1,1\n"
                                  "0xh3,0xe,0xe,0xa,0xnew,NEW,1,1\n",
                              reg);
  auto kept = filter_spam(group_transactions(load.transfers), reg);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].tx_hash == "0xh2");
  CHECK(kept[1].tx_hash == "0xh3");  // unknown token: Unlabeled, not spam
  auto twice = filter_spam(kept, reg);
  REQUIRE(twice.size() == kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) CHECK(twice[i].tx_hash == kept[i].tx_hash);
}

TEST_CASE("store round trip through JSON lines") {
  Transaction tx;
  tx.tx_hash = "0xh";
  tx.ego_account = "0xe";
  tx.method_group = MethodGroup::ClaimReward;
  tx.raw_method = "Get Reward";
  tx.transfers.push_back({"0xh", "0xe", "0xc", "0xe", "0xt", "COMP", "12.5", 99});
  auto back = transaction_from_json_line(transaction_to_json_line(tx));
  CHECK(back.tx_hash == tx.tx_hash);
  CHECK(back.method_group == tx.method_group);
  CHECK(back.raw_method == tx.raw_method);
  REQUIRE(back.transfers.size() == 1);
  CHECK(back.transfers[0] == tx.transfers[0]);
}

TEST_CASE("run_ingest writes a store with a report") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "motifscope_ingest_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file((dir / "transfers.csv").string(), std::string(kHeader) +
                                                   "0xh1,0xe,0xe,0xc,0xusdt,USDT,1,1\n"
                                                   "0xh2,0xe,0xe,0xc,0xspam,USDT,1,1\n"
                                                   "0xh3,0xe,0xe,0xc,0xusdt,USDT,-1,1\n");
  write_file((dir / "tokens.json").string(), sample_tokens().to_json_text());
  write_file((dir / "accounts.json").string(), R"([{"address":"0xc","type":"contract"}])");
  write_file((dir / "methods.csv").string(), "tx_hash,raw_method\n0xh1,Deposit\n0xh2,Swap\n");
  IngestOptions opt;
  opt.transfers_path = (dir / "transfers.csv").string();
  opt.tokens_path = (dir / "tokens.json").string();
  opt.accounts_path = (dir / "accounts.json").string();
  opt.methods_path = (dir / "methods.csv").string();
  opt.out_dir = (dir / "store").string();
  auto summary = run_ingest(opt);
  CHECK(summary.rows_accepted == 2);
  CHECK(summary.rows_rejected == 1);
  CHECK(summary.transactions_after_spam == 1);
  CHECK(summary.labeled == 1);
  auto store = load_store(opt.out_dir);
  REQUIRE(store.transactions.size() == 1);
  CHECK(store.transactions[0].method_group == MethodGroup::Deposit);
  CHECK(store.accounts.type_in("0xc", "0xe") == AccountType::Contract);
  auto labels = load_group_labels((dir / "store" / "labels.csv").string());
  CHECK(labels.at("0xh1") == MethodGroup::Deposit);
  fs::remove_all(dir);
}
