#include "motifscope/validation.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "motifscope/core.hpp"
#include "motifscope/util.hpp"

namespace motifscope {

namespace {

std::vector<std::size_t> class_counts(std::span<const int> labels, int n_classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw InputError("label index " + std::to_string(y) + " out of range");
    ++counts[static_cast<std::size_t>(y)];
  }
  return counts;
}

}  // namespace

std::vector<double> class_weights(std::span<const int> labels, int n_classes) {
  const auto counts = class_counts(labels, n_classes);
  std::vector<double> w(counts.size());
  const double n = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) throw InputError("class " + std::to_string(c) + " has no rows; cannot weight it");
    w[c] = n / (static_cast<double>(n_classes) * static_cast<double>(counts[c]));
  }
  return w;
}

std::vector<Fold> stratified_kfold(std::span<const int> labels, int n_classes, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  const auto counts = class_counts(labels, n_classes);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < static_cast<std::size_t>(k)) {
      throw InputError("class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                       " rows, fewer than the " + std::to_string(k) + " folds requested");
    }
  }
  std::vector<std::vector<std::size_t>> by_class(counts.size());
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(labels.size());
  std::size_t counter = 0;
  for (auto& members : by_class) {
    portable_shuffle(members, rng);
    for (auto i : members) fold_of[i] = static_cast<int>(counter++ % static_cast<std::size_t>(k));
  }
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      auto& dst = f == fold_of[i] ? folds[static_cast<std::size_t>(f)].test : folds[static_cast<std::size_t>(f)].train;
      dst.push_back(i);
    }
  }
  return folds;
}

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int n_classes) {
  const auto k = static_cast<std::size_t>(n_classes);
  Confusion cm(k, std::vector<std::int64_t>(k, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++cm[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return cm;
}

std::vector<Metrics> per_class_metrics(const Confusion& cm) {
  const std::size_t k = cm.size();
  std::vector<Metrics> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = cm[c][c], row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm[c][j];
      col += cm[j][c];
    }
    auto& m = out[c];
    m.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    m.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  return out;
}

Metrics macro_metrics(const Confusion& cm) {
  Metrics avg;
  const auto per = per_class_metrics(cm);
  if (per.empty()) return avg;
  for (const auto& m : per) {
    avg.precision += m.precision;
    avg.recall += m.recall;
    avg.f1 += m.f1;
  }
  const double k = static_cast<double>(per.size());
  avg.precision /= k;
  avg.recall /= k;
  avg.f1 /= k;
  return avg;
}

std::vector<std::vector<double>> row_percentages(const Confusion& cm) {
  std::vector<std::vector<double>> out(cm.size(), std::vector<double>(cm.size(), 0.0));
  for (std::size_t i = 0; i < cm.size(); ++i) {
    std::int64_t row = 0;
    for (auto v : cm[i]) row += v;
    if (row == 0) continue;
    for (std::size_t j = 0; j < cm.size(); ++j) out[i][j] = 100.0 * static_cast<double>(cm[i][j]) / static_cast<double>(row);
  }
  return out;
}

std::vector<std::vector<double>> column_proportions(const Confusion& cm) {
  std::vector<std::vector<double>> out(cm.size(), std::vector<double>(cm.size(), 0.0));
  for (std::size_t j = 0; j < cm.size(); ++j) {
    std::int64_t col = 0;
    for (std::size_t i = 0; i < cm.size(); ++i) col += cm[i][j];
    if (col == 0) continue;
    for (std::size_t i = 0; i < cm.size(); ++i) out[i][j] = static_cast<double>(cm[i][j]) / static_cast<double>(col);
  }
  return out;
}

}  // namespace motifscope
