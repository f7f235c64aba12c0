#include "motifscope/motif.hpp"

#include <algorithm>
#include <json.hpp>
#include <map>
#include <set>
#include <tuple>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

namespace {

constexpr std::array<AccountType, 3> kNeighborTypes = {AccountType::Address, AccountType::Contract,
                                                       AccountType::Null};

bool compatible(std::uint8_t role, std::uint8_t state, MatchSemantics sem) {
  return sem == MatchSemantics::Induced ? state == role : (state & role) == role;
}

std::int64_t choose2(std::int64_t n) { return n * (n - 1) / 2; }

// cnt[state][type]: neighbors of the collapsed view bucketed by pair state
// and account type. Every ego network is a star, so typed counts follow in
// closed form from these 16 numbers.
using StateTypeCounts = std::array<std::array<std::int64_t, 4>, 4>;

StateTypeCounts bucket(const EgoTransferNetwork& etn) {
  StateTypeCounts cnt{};
  for (std::uint32_t n = 1; n < etn.node_count(); ++n) {
    const auto st = etn.state(n);
    if (st != kStateNone) ++cnt[st][static_cast<int>(etn.type(n))];
  }
  return cnt;
}

template <typename Emit>
void typed_counts(const StateTypeCounts& cnt, const MotifShape& shape, MatchSemantics sem, Emit&& emit) {
  // matching(r, t): neighbors of type t that can fill a slot with role r.
  auto matching = [&](std::uint8_t role, int t) {
    std::int64_t n = 0;
    for (std::uint8_t st = 1; st <= 3; ++st) {
      if (compatible(role, st, sem)) n += cnt[st][t];
    }
    return n;
  };
  if (!shape.three_node()) {
    for (AccountType t : kNeighborTypes) {
      const auto n = matching(shape.roles[0], static_cast<int>(t));
      if (n) emit(t, AccountType::Ego, n);
    }
    return;
  }
  const auto a = shape.roles[0];
  const auto b = shape.roles[1];
  if (a == b) {
    for (std::size_t x = 0; x < kNeighborTypes.size(); ++x) {
      const auto nx = matching(a, static_cast<int>(kNeighborTypes[x]));
      if (!nx) continue;
      if (const auto same = choose2(nx)) emit(kNeighborTypes[x], kNeighborTypes[x], same);
      for (std::size_t y = x + 1; y < kNeighborTypes.size(); ++y) {
        const auto ny = matching(a, static_cast<int>(kNeighborTypes[y]));
        if (ny) emit(kNeighborTypes[x], kNeighborTypes[y], nx * ny);
      }
    }
    return;
  }
  for (AccountType ti : kNeighborTypes) {
    const auto ni = matching(a, static_cast<int>(ti));
    if (!ni) continue;
    for (AccountType tj : kNeighborTypes) {
      auto n = ni * matching(b, static_cast<int>(tj));
      if (ti == tj) {
        // A node that fits both slots cannot fill both at once.
        for (std::uint8_t st = 1; st <= 3; ++st) {
          if (compatible(a, st, sem) && compatible(b, st, sem)) n -= cnt[st][static_cast<int>(ti)];
        }
      }
      if (n) emit(ti, tj, n);
    }
  }
}

std::uint8_t parse_role_edges(const json& edges, char role, const std::string& id) {
  std::uint8_t state = 0;
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("catalog: motif " + id + " has a malformed edge");
    const auto s = e[0].get<std::string>();
    const auto t = e[1].get<std::string>();
    if (s == "E" && t.size() == 1 && t[0] == role) state |= kStateOut;
    if (t == "E" && s.size() == 1 && s[0] == role) state |= kStateIn;
  }
  return state;
}

}  // namespace

MotifCatalog::MotifCatalog(std::vector<MotifShape> shapes) : shapes_(std::move(shapes)) {
  std::set<std::vector<std::uint8_t>> seen;
  std::set<std::string> ids;
  for (const auto& s : shapes_) {
    if (s.roles.empty() || s.roles.size() > 2) throw ConfigError("catalog: motif " + s.id + " must have 2 or 3 nodes");
    for (auto r : s.roles) {
      if (r != kStateOut && r != kStateIn && r != kStateBoth) {
        throw ConfigError("catalog: motif " + s.id + " has a neighbor slot not connected to E");
      }
    }
    auto canon = s.roles;
    std::sort(canon.begin(), canon.end());
    if (!seen.insert(canon).second) throw ConfigError("catalog: motif " + s.id + " is isomorphic to an earlier entry");
    if (!ids.insert(s.id).second) throw ConfigError("catalog: duplicate motif id " + s.id);
  }
}

MotifCatalog enumerate_catalog() {
  std::vector<MotifShape> shapes;
  const std::array<std::uint8_t, 3> states = {kStateOut, kStateIn, kStateBoth};
  for (auto s : states) shapes.push_back({"", {s}});
  for (std::size_t a = 0; a < states.size(); ++a) {
    for (std::size_t b = a; b < states.size(); ++b) shapes.push_back({"", {states[a], states[b]}});
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) shapes[i].id = "m" + std::to_string(i + 1);
  return MotifCatalog(std::move(shapes));
}

MotifCatalog MotifCatalog::from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("catalog.json: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("catalog.json: expected an array");
  std::vector<MotifShape> shapes;
  for (const auto& item : doc) {
    MotifShape shape;
    shape.id = item.at("id").get<std::string>();
    const auto nodes = item.at("nodes").get<std::vector<std::string>>();
    const auto& edges = item.at("edges");
    if (nodes.empty() || nodes[0] != "E") throw ConfigError("catalog: motif " + shape.id + " must list E first");
    for (const auto& e : edges) {
      const auto s = e.at(0).get<std::string>();
      const auto t = e.at(1).get<std::string>();
      if (s != "E" && t != "E") throw ConfigError("catalog: motif " + shape.id + " has an edge between neighbors");
      if (s == t) throw ConfigError("catalog: motif " + shape.id + " has a self-loop");
      for (const auto& end : {s, t}) {
        if (std::find(nodes.begin(), nodes.end(), end) == nodes.end()) {
          throw ConfigError("catalog: motif " + shape.id + " references unknown node " + end);
        }
      }
    }
    for (std::size_t n = 1; n < nodes.size(); ++n) {
      if (nodes[n].size() != 1) throw ConfigError("catalog: node roles are single letters");
      shape.roles.push_back(parse_role_edges(edges, nodes[n][0], shape.id));
    }
    shapes.push_back(std::move(shape));
  }
  return MotifCatalog(std::move(shapes));
}

MotifCatalog MotifCatalog::from_json_file(const std::string& path) { return from_json_text(read_file(path)); }

std::string MotifCatalog::to_json_text() const {
  json arr = json::array();
  for (const auto& s : shapes_) {
    json nodes = json::array({"E"});
    json edges = json::array();
    const char names[] = {'i', 'j'};
    for (std::size_t r = 0; r < s.roles.size(); ++r) {
      const std::string role(1, names[r]);
      nodes.push_back(role);
      if (s.roles[r] & kStateOut) edges.push_back({"E", role});
      if (s.roles[r] & kStateIn) edges.push_back({role, "E"});
    }
    arr.push_back({{"id", s.id}, {"nodes", nodes}, {"edges", edges}});
  }
  return arr.dump(1) + "\n";
}

std::string motif_key(const MotifShape& shape, AccountType ti, AccountType tj) {
  std::string key = shape.id;
  key += "(E,";
  key.push_back(account_letter(ti));
  if (shape.three_node()) {
    key.push_back(',');
    key.push_back(account_letter(tj));
  }
  key.push_back(')');
  return key;
}

std::string edge_key(AccountType source, AccountType target, TokenCategory category) {
  std::string key = "(";
  key.push_back(account_letter(source));
  key.push_back(',');
  key.push_back(account_letter(target));
  key.push_back(')');
  key += category_name(category);
  return key;
}

std::vector<TypedMotifCount> count_motifs(const EgoTransferNetwork& etn, const MotifCatalog& catalog,
                                          MatchSemantics semantics) {
  const auto cnt = bucket(etn);
  std::vector<TypedMotifCount> out;
  for (const auto& shape : catalog.shapes()) {
    typed_counts(cnt, shape, semantics, [&](AccountType ti, AccountType tj, std::int64_t n) {
      out.push_back({motif_key(shape, ti, tj), n});
    });
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.key < y.key; });
  return out;
}

std::vector<EdgeFeature> edge_features(const EgoTransferNetwork& etn) {
  std::map<std::string, std::int64_t> acc;
  for (const auto& e : etn.edges()) ++acc[edge_key(etn.type(e.source), etn.type(e.target), e.category)];
  std::vector<EdgeFeature> out;
  out.reserve(acc.size());
  for (auto& [k, v] : acc) out.push_back({k, v});
  return out;
}

MotifEdgeResult count_motif_edges(const EgoTransferNetwork& etn, const MotifCatalog& catalog,
                                  MatchSemantics semantics, std::size_t bucket_limit) {
  // Per neighbor: (state, type, sorted edge labels with a direction bit).
  struct Label {
    std::string text;
    std::uint8_t dir;  // kStateOut or kStateIn
    bool operator<(const Label& o) const { return std::tie(text, dir) < std::tie(o.text, o.dir); }
  };
  using Signature = std::tuple<std::uint8_t, AccountType, std::vector<Label>>;
  std::vector<std::vector<Label>> labels(etn.node_count());
  for (const auto& e : etn.edges()) {
    const bool out = e.source == 0;
    const auto other = out ? e.target : e.source;
    labels[other].push_back({edge_key(etn.type(e.source), etn.type(e.target), e.category), out ? kStateOut : kStateIn});
  }
  std::map<Signature, std::int64_t> buckets;
  for (std::uint32_t n = 1; n < etn.node_count(); ++n) {
    if (etn.state(n) == kStateNone) continue;
    std::sort(labels[n].begin(), labels[n].end());
    ++buckets[{etn.state(n), etn.type(n), std::move(labels[n])}];
  }
  std::vector<std::pair<const Signature*, std::int64_t>> list;
  for (const auto& [sig, size] : buckets) list.emplace_back(&sig, size);

  std::map<std::string, std::int64_t> acc;
  auto filtered = [](const Signature& sig, std::uint8_t role, std::vector<std::string>& into) {
    for (const auto& l : std::get<2>(sig)) {
      if (l.dir & role) into.push_back(l.text);
    }
  };
  auto combined_key = [](std::string motif, std::vector<std::string> edge_labels) {
    std::sort(edge_labels.begin(), edge_labels.end());
    motif.push_back('|');
    for (std::size_t i = 0; i < edge_labels.size(); ++i) {
      if (i) motif.push_back('+');
      motif += edge_labels[i];
    }
    return motif;
  };

  MotifEdgeResult result;
  for (const auto& shape : catalog.shapes()) {
    if (!shape.three_node()) {
      const auto r = shape.roles[0];
      for (const auto& [sig, size] : list) {
        if (!compatible(r, std::get<0>(*sig), semantics)) continue;
        std::vector<std::string> el;
        filtered(*sig, r, el);
        acc[combined_key(motif_key(shape, std::get<1>(*sig)), std::move(el))] += size;
      }
      continue;
    }
    if (list.size() > bucket_limit) {
      result.complete = false;
      continue;
    }
    const auto a = shape.roles[0];
    const auto b = shape.roles[1];
    for (std::size_t p = 0; p < list.size(); ++p) {
      const auto& [sp, np] = list[p];
      if (!compatible(a, std::get<0>(*sp), semantics)) continue;
      for (std::size_t q = shape.symmetric() ? p : 0; q < list.size(); ++q) {
        const auto& [sq, nq] = list[q];
        if (!compatible(b, std::get<0>(*sq), semantics)) continue;
        std::int64_t n;
        if (p == q) {
          n = shape.symmetric() ? choose2(np) : np * (np - 1);
        } else {
          n = np * nq;
        }
        if (n == 0) continue;
        auto ti = std::get<1>(*sp);
        auto tj = std::get<1>(*sq);
        if (shape.symmetric() && tj < ti) std::swap(ti, tj);
        std::vector<std::string> el;
        filtered(*sp, a, el);
        filtered(*sq, b, el);
        acc[combined_key(motif_key(shape, ti, tj), std::move(el))] += n;
      }
    }
  }
  result.counts.reserve(acc.size());
  for (auto& [k, v] : acc) result.counts.push_back({k, v});
  return result;
}

// ---------------------------------------------------------------- fast path

MotifCounter::MotifCounter(MotifCatalog catalog, MatchSemantics semantics)
    : catalog_(std::move(catalog)), semantics_(semantics) {
  motif_keys_.resize(catalog_.size());
  for (std::size_t s = 0; s < catalog_.size(); ++s) {
    for (AccountType ti : kNeighborTypes) {
      for (AccountType tj : kNeighborTypes) {
        motif_keys_[s][static_cast<int>(ti)][static_cast<int>(tj)] = motif_key(catalog_.shapes()[s], ti, tj);
      }
      motif_keys_[s][static_cast<int>(ti)][0] = motif_key(catalog_.shapes()[s], ti);
    }
  }
  for (int dir = 0; dir < 2; ++dir) {
    for (AccountType t : kNeighborTypes) {
      for (std::size_t c = 0; c < kTokenCategoryCount; ++c) {
        const auto cat = static_cast<TokenCategory>(c);
        edge_keys_[dir][static_cast<int>(t)][c] =
            dir == 0 ? edge_key(AccountType::Ego, t, cat) : edge_key(t, AccountType::Ego, cat);
      }
    }
  }
}

void MotifCounter::count(const EgoTransferNetwork& etn,
                         std::vector<std::pair<const std::string*, std::int64_t>>& out) const {
  const auto cnt = bucket(etn);
  for (std::size_t s = 0; s < catalog_.size(); ++s) {
    typed_counts(cnt, catalog_.shapes()[s], semantics_, [&](AccountType ti, AccountType tj, std::int64_t n) {
      out.emplace_back(&motif_keys_[s][static_cast<int>(ti)][static_cast<int>(tj)], n);
    });
  }
}

void MotifCounter::edges(const EgoTransferNetwork& etn,
                         std::vector<std::pair<const std::string*, std::int64_t>>& out) const {
  std::array<std::array<std::array<std::int64_t, kTokenCategoryCount>, 4>, 2> cnt{};
  for (const auto& e : etn.edges()) {
    const bool outgoing = e.source == 0;
    const auto other = outgoing ? e.target : e.source;
    ++cnt[outgoing ? 0 : 1][static_cast<int>(etn.type(other))][static_cast<std::size_t>(e.category)];
  }
  for (int dir = 0; dir < 2; ++dir) {
    for (int t = 1; t < 4; ++t) {
      for (std::size_t c = 0; c < kTokenCategoryCount; ++c) {
        if (cnt[dir][t][c]) out.emplace_back(&edge_keys_[dir][t][c], cnt[dir][t][c]);
      }
    }
  }
}

std::string_view semantics_name(MatchSemantics s) {
  return s == MatchSemantics::Induced ? "induced" : "noninduced";
}

MatchSemantics parse_semantics(std::string_view s) {
  const auto v = to_lower(s);
  if (v == "induced") return MatchSemantics::Induced;
  if (v == "noninduced" || v == "non-induced" || v == "non_induced") return MatchSemantics::NonInduced;
  throw ConfigError("unknown match semantics \"" + std::string(s) + "\" (expected induced or noninduced)");
}

}  // namespace motifscope
