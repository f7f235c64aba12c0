#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <map>

#include "motifscope/ingest.hpp"
#include "motifscope/synth.hpp"
#include "motifscope/util.hpp"

using namespace motifscope;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const auto d = (fs::temp_directory_path() / ("motifscope_synth_" + name)).string();
  fs::remove_all(d);
  return d;
}

IngestSummary ingest(const std::string& in, const std::string& out) {
  IngestOptions o;
  o.transfers_path = in + "/transfers.csv";
  o.tokens_path = in + "/tokens.json";
  o.accounts_path = in + "/accounts.json";
  o.methods_path = in + "/methods.csv";
  o.method_groups_path = in + "/method_groups.json";
  o.out_dir = out;
  return run_ingest(o);
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("config round trip and validation") {
  const auto c = SynthConfig::defaults();
  CHECK(c.archetypes.size() == 8);
  const auto back = SynthConfig::from_json_text(c.to_json_text());
  CHECK(back.to_json_text() == c.to_json_text());
  CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"archetypes":[{"group":"Swap","edges":[{"from":"A","to":"C1","categories":["Stablecoin"]}]}]})"),
                  ConfigError);
  CHECK_THROWS_AS(SynthConfig::from_json_text(R"({"archetypes":[{"group":"Nope","edges":[]}]})"), ConfigError);
  CHECK_THROWS_AS(SynthConfig::from_json_text("{"), ConfigError);
  CHECK_THROWS_AS(parse_skew("zipf"), ConfigError);
}

TEST_CASE("shipped archetype file equals the built-in defaults") {
  const auto path = std::string(MOTIFSCOPE_SOURCE_DIR) + "/data/archetypes.json";
  CHECK(read_file(path) == SynthConfig::defaults().to_json_text());
}

TEST_CASE("archetype cores are exclusive") {
  for (auto mode : {FeatureMode::M, FeatureMode::ME}) {
    const auto c = SynthConfig::defaults();
    for (const auto& a : c.archetypes) {
      const auto fa = template_features(a, mode);
      CHECK(!fa.core.empty());
      for (const auto& b : c.archetypes) {
        if (a.group == b.group) continue;
        if (mode == FeatureMode::ME) {
          INFO(group_name(a.group), " vs ", group_name(b.group));
          CHECK(!subset(fa.core, template_features(b, mode).possible));
        }
      }
    }
  }
}

TEST_CASE("n = 0 writes valid empty inputs") {
  const auto d = temp_dir("empty");
  generate(SynthConfig::defaults(), 0, 1, d);
  for (const char* f : {"transfers.csv", "methods.csv", "tokens.json", "accounts.json", "method_groups.json", "truth.csv"})
    CHECK(fs::exists(d + "/" + f));
  const auto s = ingest(d, d + "/store");
  CHECK(s.rows_accepted == 0);
  CHECK(load_truth(d + "/truth.csv").empty());
  fs::remove_all(d);
}

TEST_CASE("fixed seed gives byte-identical output") {
  const auto a = temp_dir("a"), b = temp_dir("b"), c = temp_dir("c");
  generate(SynthConfig::defaults(), 500, 42, a);
  generate(SynthConfig::defaults(), 500, 42, b);
  generate(SynthConfig::defaults(), 500, 43, c);
  for (const char* f : {"transfers.csv", "methods.csv", "tokens.json", "accounts.json", "truth.csv"}) {
    CHECK(read_file(a + "/" + f) == read_file(b + "/" + f));
  }
  CHECK(read_file(a + "/transfers.csv") != read_file(c + "/transfers.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("ingest round trip: no rejections, labels and anchors preserved") {
  auto config = SynthConfig::defaults();
  apply_skew(config, Skew::Uniform);
  config.spam_rate = 0.05;
  config.unlabeled = 0.1;
  config.noise = 0.2;
  const auto d = temp_dir("roundtrip");
  const auto summary = generate(config, 2000, 7, d);
  const auto s = ingest(d, d + "/store");
  CHECK(s.rows_rejected == 0);
  CHECK(s.rows_accepted == summary.transfers);

  const auto truth = load_truth(d + "/truth.csv");
  REQUIRE(truth.size() == 2000);
  const auto store = load_store(d + "/store");
  std::map<std::string, const Transaction*> by_hash;
  for (const auto& t : store.transactions) by_hash[t.tx_hash] = &t;

  std::map<MethodGroup, TemplateFeatures> cores;
  for (const auto& a : config.archetypes) cores[a.group] = template_features(a, FeatureMode::ME);
  const Featurizer fz(enumerate_catalog(), FeaturizerOptions{});

  std::size_t spam = 0, unlabeled = 0;
  for (const auto& r : truth) {
    const auto it = by_hash.find(r.tx_hash);
    if (r.spam) {
      CHECK(it == by_hash.end());
      ++spam;
      continue;
    }
    REQUIRE(it != by_hash.end());
    const auto& tx = *it->second;
    if (!r.labeled) {
      CHECK(!tx.method_group.has_value());
      ++unlabeled;
    } else {
      REQUIRE(tx.method_group.has_value());
      CHECK(*tx.method_group == r.group);
    }
    // Noise only adds counterparts, so every anchor survives.
    const auto fv = fz.featurize(tx, store.accounts, store.tokens);
    std::set<std::string> keys;
    for (const auto& [k, v] : fv.features) keys.insert(k);
    CHECK(subset(cores[r.group].core, keys));
  }
  CHECK(spam > 50);
  CHECK(unlabeled > 100);
  fs::remove_all(d);
}

TEST_CASE("account groups drive the activity mix") {
  auto config = SynthConfig::defaults();
  config.account_groups = {{"traders", 5, {{MethodGroup::Swap, 1.0}}}, {"lenders", 5, {{MethodGroup::Borrow, 1.0}}}};
  const auto d = temp_dir("groups");
  generate(config, 300, 3, d);
  for (const auto& r : load_truth(d + "/truth.csv")) {
    CHECK(r.group == (r.account_group == "traders" ? MethodGroup::Swap : MethodGroup::Borrow));
  }
  fs::remove_all(d);
}
