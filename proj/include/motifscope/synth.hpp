#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "motifscope/features.hpp"

namespace motifscope {

/// One transfer in an archetype template. Endpoints are "E" (the ego), "N"
/// (the null address) or a label starting with A or C ("A", "C1", "C2"...);
/// equal labels within a template denote the same counterpart.
struct TemplateEdge {
  std::string from;
  std::string to;
  std::vector<TokenCategory> categories;  ///< drawn uniformly per transaction
};

struct Archetype {
  MethodGroup group = MethodGroup::Transfer;
  double weight = 1;
  std::vector<TemplateEdge> edges;
  std::vector<std::string> raw_methods;  ///< empty: names from the default method table
};

/// Activity mix for a block of synthetic accounts (profiling scenarios).
struct AccountGroup {
  std::string name;
  std::size_t accounts = 1;
  std::map<MethodGroup, double> mix;
};

struct SynthConfig {
  std::vector<Archetype> archetypes;
  double noise = 0.05;      ///< probability of one extra edge to a new A/C counterpart
  double spam_rate = 0.0;   ///< probability of an extra spam-token transfer
  double unlabeled = 0.0;   ///< fraction of transactions left out of methods.csv
  std::size_t egos = 0;     ///< ego pool size when no account groups; 0: n/25 (at least 1)
  std::vector<AccountGroup> account_groups;

  std::string to_json_text() const;
  static SynthConfig from_json_text(std::string_view text);
  static SynthConfig from_json_file(const std::string& path);
  /// Built-in templates weighted by the reference group frequencies.
  static SynthConfig defaults();
};

enum class Skew { Config, Reference, Uniform };
Skew parse_skew(std::string_view s);
/// Reference transaction counts of the eight selected groups.
double reference_weight(MethodGroup g);
void apply_skew(SynthConfig& config, Skew skew);

struct TruthRecord {
  std::string tx_hash;
  std::string ego;
  MethodGroup group = MethodGroup::Transfer;
  std::string raw_method;
  bool noisy = false;
  bool spam = false;
  bool labeled = true;
  std::string account_group;
};

struct SynthSummary {
  std::size_t transactions = 0;
  std::size_t transfers = 0;
  std::map<std::string, std::size_t> per_group;
};

/// Writes transfers.csv, methods.csv, tokens.json, accounts.json,
/// method_groups.json and truth.csv into `out_dir`. Byte-identical for a
/// fixed (config, n, seed).
SynthSummary generate(const SynthConfig& config, std::size_t n, std::uint64_t seed, const std::string& out_dir);

std::vector<TruthRecord> load_truth(const std::string& path);

/// Feature keys of every noise-free realization of an archetype:
/// `core` holds keys present in all of them, `possible` keys in any.
struct TemplateFeatures {
  std::set<std::string> core;
  std::set<std::string> possible;
};
TemplateFeatures template_features(const Archetype& a, FeatureMode mode,
                                   MatchSemantics semantics = MatchSemantics::Induced);

}  // namespace motifscope
