#include "motifscope/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <random>
#include <sstream>

#include "motifscope/etn.hpp"
#include "motifscope/ingest.hpp"
#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

namespace {

constexpr const char* kNull = "0x0000000000000000000000000000000000000000";

AccountType endpoint_type(const std::string& label) {
  if (label == "E") return AccountType::Ego;
  if (label == "N") return AccountType::Null;
  if (!label.empty() && label[0] == 'A') return AccountType::Address;
  if (!label.empty() && label[0] == 'C') return AccountType::Contract;
  throw ConfigError("template endpoint \"" + label + "\" must be E, N, or start with A or C");
}

void validate(const Archetype& a) {
  if (!(a.weight >= 0)) throw ConfigError("archetype weight must be nonnegative");
  if (a.edges.empty()) throw ConfigError("archetype " + std::string(group_name(a.group)) + " has no edges");
  for (const auto& e : a.edges) {
    const bool from_ego = e.from == "E", to_ego = e.to == "E";
    endpoint_type(e.from);
    endpoint_type(e.to);
    if (from_ego == to_ego) {
      throw ConfigError("template edge " + e.from + "->" + e.to + " must have the ego on exactly one side");
    }
    if (e.categories.empty()) throw ConfigError("template edge " + e.from + "->" + e.to + " lists no categories");
  }
}

std::string hex_id(std::uint64_t a, std::uint64_t b, std::size_t digits) {
  std::string out = "0x";
  std::uint64_t x = splitmix64(a * 0x9e3779b97f4a7c15ULL ^ splitmix64(b));
  while (out.size() < digits + 2) {
    x = splitmix64(x);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    out += buf;
  }
  out.resize(digits + 2);
  return out;
}

std::string random_hex(std::mt19937_64& rng, std::size_t digits) {
  std::string out = "0x";
  while (out.size() < digits + 2) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
    out += buf;
  }
  out.resize(digits + 2);
  return out;
}

std::string symbol_prefix(TokenCategory c) {
  switch (c) {
    case TokenCategory::Cryptocurrency: return "CRY";
    case TokenCategory::Stablecoin: return "USD";
    case TokenCategory::Marketplace: return "MKT";
    case TokenCategory::Other: return "OTH";
    case TokenCategory::NftMetaverse: return "NFT";
    case TokenCategory::Network: return "NET";
    case TokenCategory::FinancialService: return "FIN";
    case TokenCategory::Synthetic: return "SYN";
    case TokenCategory::Bridge: return "BRG";
    case TokenCategory::Unlabeled: return "UNL";
  }
  return "TOK";
}

constexpr int kTokensPerCategory = 3;
constexpr int kContractsPerArchetype = 5;

std::vector<std::string> raw_names_for(MethodGroup g) {
  std::vector<std::string> out;
  for (const auto& [group, names] : default_method_table()) {
    if (parse_group(group) == g) out.insert(out.end(), names.begin(), names.end());
  }
  return out;
}

}  // namespace

double reference_weight(MethodGroup g) {
  switch (g) {
    case MethodGroup::Transfer: return 404130;
    case MethodGroup::Swap: return 112387;
    case MethodGroup::Withdraw: return 3619;
    case MethodGroup::Deposit: return 3325;
    case MethodGroup::ClaimReward: return 2881;
    case MethodGroup::Borrow: return 1389;
    case MethodGroup::Repay: return 1256;
    case MethodGroup::Mint: return 1189;
    case MethodGroup::Unknown: return 0;
  }
  return 0;
}

Skew parse_skew(std::string_view s) {
  const auto v = to_lower(s);
  if (v == "config") return Skew::Config;
  if (v == "reference") return Skew::Reference;
  if (v == "uniform") return Skew::Uniform;
  throw ConfigError("unknown skew \"" + std::string(s) + "\" (expected config, reference or uniform)");
}

void apply_skew(SynthConfig& config, Skew skew) {
  for (auto& a : config.archetypes) {
    if (skew == Skew::Reference) a.weight = reference_weight(a.group);
    if (skew == Skew::Uniform) a.weight = 1;
  }
}

SynthConfig SynthConfig::defaults() {
  using C = TokenCategory;
  SynthConfig c;
  auto add = [&](MethodGroup g, std::vector<TemplateEdge> edges) {
    c.archetypes.push_back({g, reference_weight(g), std::move(edges), {}});
  };
  add(MethodGroup::Transfer, {{"E", "A", {C::Cryptocurrency, C::Stablecoin, C::Marketplace, C::Other}}});
  add(MethodGroup::Swap, {{"E", "C1", {C::Cryptocurrency, C::Stablecoin}}, {"C1", "E", {C::Cryptocurrency, C::Stablecoin}}});
  add(MethodGroup::Withdraw, {{"E", "N", {C::Synthetic}}, {"C1", "E", {C::Stablecoin, C::Cryptocurrency}}});
  add(MethodGroup::Deposit, {{"E", "C1", {C::Stablecoin, C::Cryptocurrency}}, {"N", "E", {C::Synthetic}}});
  add(MethodGroup::ClaimReward, {{"C1", "E", {C::FinancialService}}});
  add(MethodGroup::Borrow, {{"C1", "E", {C::Stablecoin}}, {"N", "E", {C::Synthetic}}});
  add(MethodGroup::Repay, {{"E", "C1", {C::Stablecoin}}, {"E", "N", {C::Synthetic}}});
  add(MethodGroup::Mint, {{"E", "C1", {C::Cryptocurrency}}, {"N", "E", {C::NftMetaverse}}});
  return c;
}

std::string SynthConfig::to_json_text() const {
  json arch = json::array();
  for (const auto& a : archetypes) {
    json edges = json::array();
    for (const auto& e : a.edges) {
      json cats = json::array();
      for (auto cat : e.categories) cats.push_back(std::string(category_name(cat)));
      edges.push_back({{"from", e.from}, {"to", e.to}, {"categories", std::move(cats)}});
    }
    json ja = {{"group", std::string(group_name(a.group))}, {"weight", a.weight}, {"edges", std::move(edges)}};
    if (!a.raw_methods.empty()) ja["raw_methods"] = a.raw_methods;
    arch.push_back(std::move(ja));
  }
  json j = {{"noise", noise}, {"spam_rate", spam_rate}, {"unlabeled", unlabeled}, {"egos", egos},
            {"archetypes", std::move(arch)}};
  if (!account_groups.empty()) {
    json groups = json::array();
    for (const auto& g : account_groups) {
      json mix = json::object();
      for (const auto& [grp, w] : g.mix) mix[std::string(group_name(grp))] = w;
      groups.push_back({{"name", g.name}, {"accounts", g.accounts}, {"mix", std::move(mix)}});
    }
    j["account_groups"] = std::move(groups);
  }
  return j.dump(2) + "\n";
}

SynthConfig SynthConfig::from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("archetype config is not valid JSON: ") + e.what());
  }
  try {
    SynthConfig c;
    c.noise = j.value("noise", 0.05);
    c.spam_rate = j.value("spam_rate", 0.0);
    c.unlabeled = j.value("unlabeled", 0.0);
    c.egos = j.value("egos", std::size_t{0});
    for (double p : {c.noise, c.spam_rate, c.unlabeled}) {
      if (!(p >= 0 && p <= 1)) throw ConfigError("noise, spam_rate and unlabeled must lie in [0, 1]");
    }
    std::set<MethodGroup> seen;
    for (const auto& ja : j.at("archetypes")) {
      Archetype a;
      const auto name = ja.at("group").get<std::string>();
      const auto g = parse_group(name);
      if (!g || *g == MethodGroup::Unknown) throw ConfigError("unknown archetype group \"" + name + "\"");
      if (!seen.insert(*g).second) throw ConfigError("archetype \"" + name + "\" is defined twice");
      a.group = *g;
      a.weight = ja.value("weight", 1.0);
      for (const auto& je : ja.at("edges")) {
        TemplateEdge e;
        e.from = je.at("from").get<std::string>();
        e.to = je.at("to").get<std::string>();
        for (const auto& cat : je.at("categories")) {
          const auto parsed = parse_category(cat.get<std::string>());
          if (!parsed) throw ConfigError("unknown token category \"" + cat.get<std::string>() + "\"");
          e.categories.push_back(*parsed);
        }
        a.edges.push_back(std::move(e));
      }
      if (ja.contains("raw_methods")) a.raw_methods = ja.at("raw_methods").get<std::vector<std::string>>();
      validate(a);
      c.archetypes.push_back(std::move(a));
    }
    if (j.contains("account_groups")) {
      for (const auto& jg : j.at("account_groups")) {
        AccountGroup g;
        g.name = jg.at("name").get<std::string>();
        g.accounts = jg.at("accounts").get<std::size_t>();
        for (const auto& [k, v] : jg.at("mix").items()) {
          const auto grp = parse_group(k);
          if (!grp || !seen.count(*grp)) throw ConfigError("account group mix names an undefined archetype \"" + k + "\"");
          g.mix[*grp] = v.get<double>();
        }
        if (g.accounts == 0 || g.mix.empty()) throw ConfigError("account group \"" + g.name + "\" is empty");
        c.account_groups.push_back(std::move(g));
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed archetype config: ") + e.what());
  }
}

SynthConfig SynthConfig::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

namespace {

std::size_t pick_weighted(std::mt19937_64& rng, const std::vector<double>& cumulative) {
  const double u = uniform_unit(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::string amount_text(std::mt19937_64& rng) {
  const auto cents = 1 + uniform_below(rng, 10'000'000);
  return std::to_string(cents / 100) + "." + (cents % 100 < 10 ? "0" : "") + std::to_string(cents % 100);
}

}  // namespace

SynthSummary generate(const SynthConfig& config, std::size_t n, std::uint64_t seed, const std::string& out_dir) {
  if (config.archetypes.empty()) throw ConfigError("archetype config defines no archetypes");
  for (const auto& a : config.archetypes) validate(a);
  std::vector<double> cumulative;
  double total = 0;
  for (const auto& a : config.archetypes) cumulative.push_back(total += a.weight);
  if (!(total > 0)) throw ConfigError("archetype weights sum to zero");

  std::filesystem::create_directories(out_dir);
  std::mt19937_64 rng(seed);

  // Token pools.
  TokenRegistry tokens;
  std::vector<std::vector<std::pair<std::string, std::string>>> pool(kTokenCategoryCount);
  for (std::size_t c = 0; c + 1 < kTokenCategoryCount; ++c) {
    for (int i = 0; i < kTokensPerCategory; ++i) {
      TokenInfo t;
      t.contract = hex_id(1000 + c, static_cast<std::uint64_t>(i), 40);
      t.symbol = symbol_prefix(static_cast<TokenCategory>(c)) + std::to_string(i + 1);
      t.category = static_cast<TokenCategory>(c);
      pool[c].emplace_back(t.contract, t.symbol);
      tokens.add(t);
    }
  }
  std::vector<std::pair<std::string, std::string>> spam_pool;
  for (int i = 0; i < kTokensPerCategory; ++i) {
    TokenInfo t;
    t.contract = hex_id(2000, static_cast<std::uint64_t>(i), 40);
    t.symbol = "SPAM" + std::to_string(i + 1);
    t.is_spam = true;
    spam_pool.emplace_back(t.contract, t.symbol);
    tokens.add(t);
  }

  // Accounts: egos and per-archetype protocol contracts.
  AccountRegistry accounts;
  struct Ego {
    std::string address;
    std::size_t group = 0;  // index into account_groups when present
  };
  std::vector<Ego> egos;
  if (!config.account_groups.empty()) {
    for (std::size_t g = 0; g < config.account_groups.size(); ++g) {
      for (std::size_t i = 0; i < config.account_groups[g].accounts; ++i) egos.push_back({hex_id(3000 + g, i, 40), g});
    }
  } else {
    const std::size_t count = config.egos ? config.egos : std::max<std::size_t>(1, n / 25);
    for (std::size_t i = 0; i < count; ++i) egos.push_back({hex_id(3000, i, 40), 0});
  }
  for (const auto& e : egos) accounts.declare(e.address, AccountType::Ego);
  std::vector<std::vector<std::string>> contracts(config.archetypes.size());
  for (std::size_t a = 0; a < config.archetypes.size(); ++a) {
    for (int i = 0; i < kContractsPerArchetype; ++i) {
      contracts[a].push_back(hex_id(4000 + static_cast<std::uint64_t>(config.archetypes[a].group), static_cast<std::uint64_t>(i), 40));
      accounts.declare(contracts[a].back(), AccountType::Contract);
    }
  }
  std::vector<std::vector<std::string>> raw_names(config.archetypes.size());
  MethodMapping mapping = MethodMapping::defaults();
  for (std::size_t a = 0; a < config.archetypes.size(); ++a) {
    raw_names[a] = config.archetypes[a].raw_methods.empty() ? raw_names_for(config.archetypes[a].group)
                                                            : config.archetypes[a].raw_methods;
    if (raw_names[a].empty()) raw_names[a].push_back(std::string(group_name(config.archetypes[a].group)));
    for (const auto& r : raw_names[a]) mapping.add(r, config.archetypes[a].group);
  }
  // Per account-group cumulative mix over archetype indices.
  std::vector<std::vector<double>> group_cumulative;
  for (const auto& g : config.account_groups) {
    std::vector<double> cum;
    double t = 0;
    for (const auto& a : config.archetypes) {
      auto it = g.mix.find(a.group);
      cum.push_back(t += it == g.mix.end() ? 0.0 : it->second);
    }
    if (!(t > 0)) throw ConfigError("account group \"" + g.name + "\" has an all-zero mix");
    group_cumulative.push_back(std::move(cum));
  }

  std::ostringstream transfers, methods, truth;
  transfers << "tx_hash,ego,from,to,token_contract,token_symbol,amount,block_number\n";
  methods << "tx_hash,raw_method\n";
  truth << "tx_hash,ego,group,raw_method,noisy,spam,labeled,account_group\n";
  SynthSummary summary;
  summary.transactions = n;

  for (std::size_t i = 0; i < n; ++i) {
    const Ego& ego = egos[static_cast<std::size_t>(uniform_below(rng, egos.size()))];
    const std::size_t ai = config.account_groups.empty() ? pick_weighted(rng, cumulative)
                                                         : pick_weighted(rng, group_cumulative[ego.group]);
    const auto& arch = config.archetypes[ai];
    const std::string tx = random_hex(rng, 64);
    const std::uint64_t block = 15'000'000 + i / 4;
    std::map<std::string, std::string> who = {{"E", ego.address}, {"N", kNull}};
    auto resolve = [&](const std::string& label) -> const std::string& {
      auto it = who.find(label);
      if (it != who.end()) return it->second;
      std::string addr = label[0] == 'A' ? random_hex(rng, 40)
                                         : contracts[ai][static_cast<std::size_t>(uniform_below(rng, contracts[ai].size()))];
      return who.emplace(label, std::move(addr)).first->second;
    };
    auto emit = [&](const std::string& from, const std::string& to, const std::pair<std::string, std::string>& token) {
      transfers << tx << ',' << ego.address << ',' << from << ',' << to << ',' << token.first << ',' << token.second
                << ',' << amount_text(rng) << ',' << block << '\n';
      ++summary.transfers;
    };
    for (const auto& e : arch.edges) {
      const auto& from = resolve(e.from);
      const auto& to = resolve(e.to);
      const auto cat = e.categories[static_cast<std::size_t>(uniform_below(rng, e.categories.size()))];
      const auto& p = pool[static_cast<std::size_t>(cat)];
      emit(from, to, p[static_cast<std::size_t>(uniform_below(rng, p.size()))]);
    }
    TruthRecord rec;
    rec.noisy = uniform_unit(rng) < config.noise;
    if (rec.noisy) {
      const bool contract = uniform_below(rng, 2) == 1;
      std::string other = random_hex(rng, 40);
      if (contract) accounts.declare(other, AccountType::Contract);
      const auto cat = static_cast<std::size_t>(uniform_below(rng, kTokenCategoryCount - 1));
      const auto& token = pool[cat][static_cast<std::size_t>(uniform_below(rng, pool[cat].size()))];
      if (uniform_below(rng, 2) == 0) {
        emit(ego.address, other, token);
      } else {
        emit(other, ego.address, token);
      }
    }
    rec.spam = uniform_unit(rng) < config.spam_rate;
    if (rec.spam) {
      const auto& token = spam_pool[static_cast<std::size_t>(uniform_below(rng, spam_pool.size()))];
      emit(random_hex(rng, 40), ego.address, token);
    }
    rec.labeled = uniform_unit(rng) >= config.unlabeled;
    rec.raw_method = raw_names[ai][static_cast<std::size_t>(uniform_below(rng, raw_names[ai].size()))];
    if (rec.labeled) methods << tx << ',' << csv_escape(rec.raw_method) << '\n';
    ++summary.per_group[std::string(group_name(arch.group))];
    truth << tx << ',' << ego.address << ',' << csv_escape(group_name(arch.group)) << ',' << csv_escape(rec.raw_method)
          << ',' << rec.noisy << ',' << rec.spam << ',' << rec.labeled << ','
          << csv_escape(config.account_groups.empty() ? "" : config.account_groups[ego.group].name) << '\n';
  }

  write_file(out_dir + "/transfers.csv", transfers.str());
  write_file(out_dir + "/methods.csv", methods.str());
  write_file(out_dir + "/truth.csv", truth.str());
  write_file(out_dir + "/tokens.json", tokens.to_json_text());
  write_file(out_dir + "/accounts.json", accounts.to_json_text());
  write_file(out_dir + "/method_groups.json", mapping.to_json_text());
  return summary;
}

std::vector<TruthRecord> load_truth(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<TruthRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) throw InputError("truth.csv row has " + std::to_string(f.size()) + " fields, expected 8");
    TruthRecord r;
    r.tx_hash = f[0];
    r.ego = f[1];
    const auto g = parse_group(f[2]);
    if (!g) throw InputError("truth.csv names an unknown group \"" + f[2] + "\"");
    r.group = *g;
    r.raw_method = f[3];
    r.noisy = f[4] == "1";
    r.spam = f[5] == "1";
    r.labeled = f[6] == "1";
    r.account_group = f[7];
    out.push_back(std::move(r));
  }
  return out;
}

TemplateFeatures template_features(const Archetype& a, FeatureMode mode, MatchSemantics semantics) {
  validate(a);
  FeaturizerOptions opt;
  opt.mode = mode;
  opt.semantics = semantics;
  const Featurizer featurizer(enumerate_catalog(), opt);
  TemplateFeatures out;
  std::vector<std::size_t> choice(a.edges.size(), 0);
  bool first = true;
  while (true) {
    EgoTransferNetwork g("E");
    std::map<std::string, std::uint32_t> node = {{"E", 0}};
    auto id = [&](const std::string& label) {
      auto it = node.find(label);
      if (it != node.end()) return it->second;
      const auto v = g.add_node(label, endpoint_type(label));
      node[label] = v;
      return v;
    };
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
      g.add_edge(id(a.edges[e].from), id(a.edges[e].to), a.edges[e].categories[choice[e]]);
    }
    std::set<std::string> keys;
    for (const auto& [k, v] : featurizer.featurize(g).features) {
      if (v > 0) keys.insert(k);
    }
    out.possible.insert(keys.begin(), keys.end());
    if (first) {
      out.core = keys;
      first = false;
    } else {
      std::set<std::string> both;
      std::set_intersection(out.core.begin(), out.core.end(), keys.begin(), keys.end(), std::inserter(both, both.end()));
      out.core = std::move(both);
    }
    std::size_t e = 0;
    while (e < choice.size() && ++choice[e] == a.edges[e].categories.size()) choice[e++] = 0;
    if (e == choice.size()) break;
  }
  return out;
}

}  // namespace motifscope
