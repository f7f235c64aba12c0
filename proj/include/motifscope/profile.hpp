#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "motifscope/signatures.hpp"

namespace motifscope {

/// Per-account signature usage. Columns are the non-empty signatures of a
/// SignatureSet, in leaf order.
struct ProfileTable {
  std::vector<std::string> columns;  ///< "L<leaf> <group>"
  std::vector<std::int32_t> leaves;
  std::vector<std::string> accounts;  ///< ascending
  std::vector<std::int64_t> matched;  ///< matched transactions per account
  std::vector<std::vector<std::int64_t>> raw;
  std::vector<std::vector<double>> normalized;  ///< raw / row sum
  std::vector<std::vector<double>> zscored;     ///< per column, sample sd; constant columns -> 0

  /// CSV of raw counts: account, matched, one column per signature.
  std::string to_csv() const;
  /// Parses to_csv output and recomputes the derived matrices.
  static ProfileTable from_csv(std::string_view text);
  std::string normalized_csv() const;
  std::string zscored_csv() const;

  void recompute();
};

struct ProfileOptions {
  std::int64_t min_matches = 10;
};

/// Counts matches by (ego account, leaf). An account enters the table when
/// it has at least `min_matches` matched transactions; accounts with none
/// are dropped with a warning.
ProfileTable build_profiles(const std::vector<SignatureMatch>& matches, const SignatureSet& signatures,
                            const ProfileOptions& options = {});

enum class Linkage { Ward, Complete, Average };
std::string_view linkage_name(Linkage l);
Linkage parse_linkage(std::string_view s);

struct Merge {
  std::size_t a = 0, b = 0;  ///< cluster ids: leaves 0..n-1, merge i creates n+i
  double height = 0;
  std::size_t size = 0;
};

/// Agglomerative clustering over Euclidean distances with Lance-Williams
/// updates. Ties go to the lowest (i, j) pair of active clusters.
std::vector<Merge> linkage(const std::vector<std::vector<double>>& points, Linkage method);

/// Labels after applying the first n-k merges. Labels are canonical: cluster
/// ids ordered by their smallest member index.
std::vector<int> cut_tree(const std::vector<Merge>& merges, std::size_t n, std::size_t k);

/// Leaf order of the dendrogram (left child first).
std::vector<std::size_t> dendrogram_order(const std::vector<Merge>& merges, std::size_t n);

/// Mean silhouette; singletons score 0; zero-distance ties score 0.
double silhouette(const std::vector<std::vector<double>>& points, const std::vector<int>& labels);

struct ClusterCandidate {
  std::size_t k = 0;
  double silhouette = 0;
  std::vector<int> labels;
};

struct ClusteringResult {
  Linkage method = Linkage::Ward;
  std::vector<std::string> accounts;
  std::vector<Merge> merges;
  std::vector<ClusterCandidate> candidates;  ///< k = 2 .. min(15, n-1)
  std::size_t chosen_k = 1;
  double chosen_silhouette = 0;  ///< NaN when undefined (n < 3)
  std::vector<int> labels;       ///< for chosen_k

  std::string to_json_text() const;
};

/// Clusters the z-scored rows; k maximizes silhouette, ties to the smaller k.
ClusteringResult hcluster(const ProfileTable& profiles, Linkage method = Linkage::Ward, std::size_t max_k = 15);

/// Writes clustermap.json and clustermap.csv (rows and columns in
/// dendrogram order, z-scored values, cluster labels) into `dir`.
void emit_clustermap_data(const ClusteringResult& result, const ProfileTable& profiles, const std::string& dir);

}  // namespace motifscope
