#include <doctest.h>

#include <filesystem>

#include "motifscope/pipeline.hpp"
#include "motifscope/synth.hpp"
#include "motifscope/util.hpp"

using namespace motifscope;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& name) {
  const auto d = (fs::temp_directory_path() / ("motifscope_pipeline_" + name)).string();
  fs::remove_all(d);
  return d;
}

PipelineConfig config_for(const std::string& in, const std::string& out) {
  PipelineConfig c;
  c.transfers = in + "/transfers.csv";
  c.tokens = in + "/tokens.json";
  c.accounts = in + "/accounts.json";
  c.methods = in + "/methods.csv";
  c.method_groups = in + "/method_groups.json";
  c.out_dir = out;
  c.folds = 3;
  c.compare_models = {ModelKind::Tree};
  c.min_matches = 1;
  return c;
}

}  // namespace

TEST_CASE("stats: single transfer and empty store") {
  Store empty;
  const auto e = compute_stats(empty);
  CHECK(e.transactions == 0);
  CHECK(e.transfers_hist.empty());
  CHECK(e.accounts.empty());

  Store one;
  Transaction tx;
  tx.tx_hash = "0xa";
  tx.ego_account = "0xe";
  TokenTransfer t;
  t.tx_hash = "0xa";
  t.ego_account = "0xe";
  t.from_account = "0xe";
  t.to_account = "0xb";
  t.token_contract = "0xt";
  t.token_symbol = "T";
  tx.transfers.push_back(t);
  one.transactions.push_back(tx);
  const auto s = compute_stats(one);
  CHECK(s.transfers_hist == std::map<std::size_t, std::size_t>{{1, 1}});
  CHECK(s.accounts.at("0xe").distinct_tokens == 1);
  CHECK(s.fraction_unlabeled == 1.0);
  CHECK(s.fraction_unlabeled_tokens == 1.0);
}

TEST_CASE("pipeline config round trip and validation") {
  PipelineConfig c = config_for("in", "out");
  c.target_leaves = 18;
  c.itemset = ItemsetMode::Exhaustive;
  c.linkage = Linkage::Average;
  c.mode = FeatureMode::MxE;
  const auto text = c.to_json_text();
  CHECK(PipelineConfig::from_json_text(text).to_json_text() == text);
  CHECK_THROWS_AS(PipelineConfig::from_json_text(R"({"bogus": 1})"), ConfigError);
  c.support = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.support = 0.8;
  c.alpha = 0.01;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("pipeline: supervised run, rerun digests, match-only branch") {
  const auto in = temp_dir("in");
  auto sc = SynthConfig::defaults();
  apply_skew(sc, Skew::Uniform);
  generate(sc, 1200, 5, in);

  const auto a = temp_dir("a"), b = temp_dir("b");
  const auto ra = run_pipeline(config_for(in, a));
  const auto rb = run_pipeline(config_for(in, b));
  CHECK(ra.supervised);
  CHECK(ra.artifacts == rb.artifacts);
  for (const char* f : {"stats.json", "features.jsonl", "model.json", "report.json", "classification.csv", "path.csv",
                        "pruned.json", "pruned.dot", "signatures.json", "leaves.csv", "matches.jsonl", "profiles.csv",
                        "clusters.json", "plotdata/clustermap.json", "manifest.json"}) {
    INFO(f);
    CHECK(fs::exists(a + "/" + f));
  }

  auto nolabels = config_for(in, temp_dir("c"));
  nolabels.methods.clear();
  CHECK_THROWS_AS(run_pipeline(nolabels), StageError);
  nolabels.signatures = a + "/signatures.json";
  const auto rc = run_pipeline(nolabels);
  CHECK(!rc.supervised);
  CHECK(rc.artifacts.at("matches.jsonl") == ra.artifacts.at("matches.jsonl"));
  CHECK(!rc.artifacts.count("model.json"));

  auto broken = config_for(in, temp_dir("d"));
  broken.transfers = in + "/missing.csv";
  try {
    run_pipeline(broken);
    CHECK(false);
  } catch (const StageError& e) {
    CHECK(e.stage() == "ingest");
    CHECK(e.input_error());
  }
  for (const auto& d : {in, a, b, nolabels.out_dir, broken.out_dir}) fs::remove_all(d);
}
