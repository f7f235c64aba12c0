#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace motifscope {

/// Balanced weights N / (K * n_c) over labels in [0, K). Throws InputError
/// when a class has no rows.
std::vector<double> class_weights(std::span<const int> labels, int n_classes);

struct Fold {
  std::vector<std::size_t> train;  ///< ascending row indices
  std::vector<std::size_t> test;   ///< ascending row indices
};

/// Stratified k-fold split. Each class is shuffled with `seed` and dealt
/// round-robin to folds, continuing the fold counter across classes so fold
/// sizes stay balanced. Throws InputError when a class has fewer than k rows.
std::vector<Fold> stratified_kfold(std::span<const int> labels, int n_classes, int k, std::uint64_t seed);

struct Metrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

using Confusion = std::vector<std::vector<std::int64_t>>;  ///< [true][predicted]

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int n_classes);

/// Per-class metrics with zero-division mapped to 0.
std::vector<Metrics> per_class_metrics(const Confusion& cm);

/// Unweighted mean of per_class_metrics.
Metrics macro_metrics(const Confusion& cm);

/// Row-normalized percentages (each row sums to 100 unless empty).
std::vector<std::vector<double>> row_percentages(const Confusion& cm);

/// Each entry divided by its column total (0 for empty columns).
std::vector<std::vector<double>> column_proportions(const Confusion& cm);

}  // namespace motifscope
