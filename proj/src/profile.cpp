#include "motifscope/profile.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "motifscope/util.hpp"

namespace motifscope {

using nlohmann::json;

void ProfileTable::recompute() {
  const std::size_t n = accounts.size(), d = columns.size();
  normalized.assign(n, std::vector<double>(d, 0.0));
  zscored.assign(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto total = std::accumulate(raw[i].begin(), raw[i].end(), std::int64_t{0});
    if (total == 0) continue;
    for (std::size_t j = 0; j < d; ++j) normalized[i][j] = static_cast<double>(raw[i][j]) / static_cast<double>(total);
  }
  if (n < 2) return;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0;
    for (std::size_t i = 0; i < n; ++i) mean += normalized[i][j];
    mean /= static_cast<double>(n);
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (normalized[i][j] - mean) * (normalized[i][j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 1e-15)) continue;
    for (std::size_t i = 0; i < n; ++i) zscored[i][j] = (normalized[i][j] - mean) / sd;
  }
}

namespace {

std::string matrix_csv(const ProfileTable& t, const std::vector<std::vector<double>>& m) {
  std::ostringstream out;
  out << "account";
  for (const auto& c : t.columns) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t i = 0; i < t.accounts.size(); ++i) {
    out << csv_escape(t.accounts[i]);
    for (double v : m[i]) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

std::int32_t leaf_of_column(const std::string& name) {
  if (name.size() < 2 || name[0] != 'L') throw InputError("profile column \"" + name + "\" is not of the form L<leaf> <group>");
  try {
    return static_cast<std::int32_t>(std::stol(name.substr(1)));
  } catch (const std::exception&) {
    throw InputError("profile column \"" + name + "\" has no leaf number");
  }
}

}  // namespace

std::string ProfileTable::to_csv() const {
  std::ostringstream out;
  out << "account,matched";
  for (const auto& c : columns) out << ',' << csv_escape(c);
  out << '\n';
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    out << csv_escape(accounts[i]) << ',' << matched[i];
    for (auto v : raw[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

ProfileTable ProfileTable::from_csv(std::string_view text) {
  ProfileTable t;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw InputError("profile CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "account" || header[1] != "matched") {
    throw InputError("profile CSV must start with account,matched");
  }
  t.columns.assign(header.begin() + 2, header.end());
  for (const auto& c : t.columns) t.leaves.push_back(leaf_of_column(c));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw InputError("profile CSV line " + std::to_string(lineno) + " has the wrong field count");
    t.accounts.push_back(f[0]);
    std::vector<std::int64_t> row;
    try {
      t.matched.push_back(std::stoll(f[1]));
      for (std::size_t j = 2; j < f.size(); ++j) row.push_back(std::stoll(f[j]));
    } catch (const std::exception&) {
      throw InputError("profile CSV line " + std::to_string(lineno) + " has a non-integer count");
    }
    t.raw.push_back(std::move(row));
  }
  t.recompute();
  return t;
}

std::string ProfileTable::normalized_csv() const { return matrix_csv(*this, normalized); }
std::string ProfileTable::zscored_csv() const { return matrix_csv(*this, zscored); }

ProfileTable build_profiles(const std::vector<SignatureMatch>& matches, const SignatureSet& signatures,
                            const ProfileOptions& options) {
  ProfileTable t;
  std::map<std::int32_t, std::size_t> col_of;
  for (const auto& s : signatures.signatures) {
    if (s.empty()) continue;
    col_of[s.leaf] = t.columns.size();
    t.columns.push_back("L" + std::to_string(s.leaf) + " " + s.group);
    t.leaves.push_back(s.leaf);
  }
  struct Acc {
    std::vector<std::int64_t> raw;
    std::int64_t matched = 0;
  };
  std::map<std::string, Acc> by_account;
  for (const auto& m : matches) {
    auto& acc = by_account[m.ego];
    if (acc.raw.empty()) acc.raw.assign(t.columns.size(), 0);
    bool any = false;
    for (auto leaf : m.leaves) {
      auto it = col_of.find(leaf);
      if (it == col_of.end()) continue;
      ++acc.raw[it->second];
      any = true;
    }
    acc.matched += any;
  }
  std::size_t none = 0, few = 0;
  for (auto& [account, acc] : by_account) {
    if (acc.matched == 0) {
      ++none;
      continue;
    }
    if (acc.matched < options.min_matches) {
      ++few;
      continue;
    }
    t.accounts.push_back(account);
    t.matched.push_back(acc.matched);
    t.raw.push_back(std::move(acc.raw));
  }
  if (none) warn(std::to_string(none) + " account(s) have no signature matches and were excluded from profiling");
  if (few) {
    warn(std::to_string(few) + " account(s) have fewer than " + std::to_string(options.min_matches) +
         " matched transactions and were excluded from profiling");
  }
  t.recompute();
  return t;
}

std::string_view linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Ward: return "ward";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "ward";
}

Linkage parse_linkage(std::string_view s) {
  const auto v = to_lower(s);
  if (v == "ward") return Linkage::Ward;
  if (v == "complete") return Linkage::Complete;
  if (v == "average") return Linkage::Average;
  throw ConfigError("unknown linkage \"" + std::string(s) + "\" (expected ward, complete or average)");
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<std::vector<double>> distances(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = euclid(pts[i], pts[j]);
  return d;
}

}  // namespace

std::vector<Merge> linkage(const std::vector<std::vector<double>>& points, Linkage method) {
  const std::size_t n = points.size();
  std::vector<Merge> merges;
  if (n < 2) return merges;
  auto d = distances(points);
  std::vector<std::size_t> active(n), id(n), size(n, 1);
  std::iota(active.begin(), active.end(), std::size_t{0});
  std::iota(id.begin(), id.end(), std::size_t{0});
  while (active.size() > 1) {
    std::size_t bi = 0, bj = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double v = d[active[x]][active[y]];
        if (v < best) {
          best = v;
          bi = x;
          bj = y;
        }
      }
    }
    const std::size_t i = active[bi], j = active[bj];
    const double ni = static_cast<double>(size[i]), nj = static_cast<double>(size[j]);
    for (auto k : active) {
      if (k == i || k == j) continue;
      const double nk = static_cast<double>(size[k]);
      double v = 0;
      switch (method) {
        case Linkage::Complete: v = std::max(d[k][i], d[k][j]); break;
        case Linkage::Average: v = (ni * d[k][i] + nj * d[k][j]) / (ni + nj); break;
        case Linkage::Ward: {
          const double t = ((ni + nk) * d[k][i] * d[k][i] + (nj + nk) * d[k][j] * d[k][j] - nk * best * best) /
                           (ni + nj + nk);
          v = std::sqrt(std::max(0.0, t));
          break;
        }
      }
      d[k][i] = d[i][k] = v;
    }
    Merge m;
    m.a = std::min(id[i], id[j]);
    m.b = std::max(id[i], id[j]);
    m.height = best;
    m.size = size[i] + size[j];
    merges.push_back(m);
    size[i] += size[j];
    id[i] = n + merges.size() - 1;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return merges;
}

std::vector<int> cut_tree(const std::vector<Merge>& merges, std::size_t n, std::size_t k) {
  k = std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
  std::vector<std::size_t> parent(n + merges.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m + k < n && m < merges.size(); ++m) {
    const std::size_t node = n + m;
    parent[find(merges[m].a)] = node;
    parent[find(merges[m].b)] = node;
  }
  std::vector<int> labels(n);
  std::map<std::size_t, int> canon;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    auto [it, fresh] = canon.emplace(root, static_cast<int>(canon.size()));
    labels[i] = it->second;
  }
  return labels;
}

std::vector<std::size_t> dendrogram_order(const std::vector<Merge>& merges, std::size_t n) {
  if (n == 0) return {};
  if (merges.empty()) {
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), std::size_t{0});
    return o;
  }
  std::vector<std::size_t> out;
  std::vector<std::size_t> stack = {n + merges.size() - 1};
  while (!stack.empty()) {
    const auto c = stack.back();
    stack.pop_back();
    if (c < n) {
      out.push_back(c);
      continue;
    }
    stack.push_back(merges[c - n].b);
    stack.push_back(merges[c - n].a);
  }
  return out;
}

double silhouette(const std::vector<std::vector<double>>& points, const std::vector<int>& labels) {
  const std::size_t n = points.size();
  if (n == 0) return 0;
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> size(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++size[static_cast<std::size_t>(l)];
  const auto d = distances(points);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto li = static_cast<std::size_t>(labels[i]);
    if (size[li] <= 1) continue;
    std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t j = 0; j < n; ++j) sum[static_cast<std::size_t>(labels[j])] += d[i][j];
    const double a = sum[li] / static_cast<double>(size[li] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sum.size(); ++c) {
      if (c == li || size[c] == 0) continue;
      b = std::min(b, sum[c] / static_cast<double>(size[c]));
    }
    if (!std::isfinite(b)) continue;
    const double den = std::max(a, b);
    if (den > 0) total += (b - a) / den;
  }
  return total / static_cast<double>(n);
}

ClusteringResult hcluster(const ProfileTable& profiles, Linkage method, std::size_t max_k) {
  const std::size_t n = profiles.accounts.size();
  if (n < 2) throw InputError("clustering needs at least 2 account profiles, got " + std::to_string(n));
  ClusteringResult r;
  r.method = method;
  r.accounts = profiles.accounts;
  r.merges = linkage(profiles.zscored, method);
  const std::size_t hi = std::min(max_k, n - 1);
  if (hi < 2) {
    warn("fewer than 3 accounts: silhouette is undefined, reporting a single cluster");
    r.chosen_k = 1;
    r.chosen_silhouette = std::numeric_limits<double>::quiet_NaN();
    r.labels.assign(n, 0);
    return r;
  }
  bool degenerate = true;
  for (const auto& m : r.merges) degenerate = degenerate && m.height <= 0;
  for (std::size_t k = 2; k <= hi; ++k) {
    ClusterCandidate c;
    c.k = k;
    c.labels = cut_tree(r.merges, n, k);
    c.silhouette = degenerate ? 0.0 : silhouette(profiles.zscored, c.labels);
    r.candidates.push_back(std::move(c));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.candidates.size(); ++i) {
    if (r.candidates[i].silhouette > r.candidates[best].silhouette) best = i;
  }
  if (degenerate) warn("all account profiles are identical; silhouette is 0 and k = 2 is reported");
  r.chosen_k = r.candidates[best].k;
  r.chosen_silhouette = r.candidates[best].silhouette;
  r.labels = r.candidates[best].labels;
  return r;
}

namespace {

json merges_json(const std::vector<Merge>& merges) {
  json z = json::array();
  for (const auto& m : merges) z.push_back({m.a, m.b, m.height, m.size});
  return z;
}

}  // namespace

std::string ClusteringResult::to_json_text() const {
  json j;
  j["linkage"] = std::string(linkage_name(method));
  j["accounts"] = accounts;
  j["merges"] = merges_json(merges);
  json cands = json::array();
  for (const auto& c : candidates) cands.push_back({{"k", c.k}, {"silhouette", c.silhouette}, {"labels", c.labels}});
  j["candidates"] = std::move(cands);
  j["chosen_k"] = chosen_k;
  j["silhouette"] = std::isnan(chosen_silhouette) ? json(nullptr) : json(chosen_silhouette);
  j["labels"] = labels;
  return j.dump(1) + "\n";
}

void emit_clustermap_data(const ClusteringResult& result, const ProfileTable& profiles, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::size_t n = profiles.accounts.size(), d = profiles.columns.size();
  const auto row_order = dendrogram_order(result.merges, n);
  std::vector<std::vector<double>> cols(d, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) cols[j][i] = profiles.zscored[i][j];
  const auto col_merges = linkage(cols, result.method);
  const auto col_order = dendrogram_order(col_merges, d);

  json j;
  j["linkage"] = std::string(linkage_name(result.method));
  json rows = json::array(), columns = json::array(), labels = json::array(), matrix = json::array();
  for (auto i : row_order) {
    rows.push_back(profiles.accounts[i]);
    labels.push_back(result.labels.empty() ? 0 : result.labels[i]);
    json line = json::array();
    for (auto c : col_order) line.push_back(profiles.zscored[i][c]);
    matrix.push_back(std::move(line));
  }
  for (auto c : col_order) columns.push_back(profiles.columns[c]);
  j["rows"] = std::move(rows);
  j["columns"] = std::move(columns);
  j["row_order"] = row_order;
  j["column_order"] = col_order;
  j["row_linkage"] = merges_json(result.merges);
  j["column_linkage"] = merges_json(col_merges);
  j["labels"] = std::move(labels);
  j["zscored"] = std::move(matrix);
  write_file(dir + "/clustermap.json", j.dump(1) + "\n");

  std::ostringstream csv;
  csv << "account,cluster";
  for (auto c : col_order) csv << ',' << csv_escape(profiles.columns[c]);
  csv << '\n';
  for (auto i : row_order) {
    csv << csv_escape(profiles.accounts[i]) << ',' << (result.labels.empty() ? 0 : result.labels[i]);
    for (auto c : col_order) csv << ',' << format_double(profiles.zscored[i][c]);
    csv << '\n';
  }
  write_file(dir + "/clustermap.csv", csv.str());
}

}  // namespace motifscope
