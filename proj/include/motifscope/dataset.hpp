#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "motifscope/features.hpp"

namespace motifscope {

/// Sparse row over vocabulary columns (sorted column indices).
struct SparseRow {
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
};

/// Maps a feature vector onto vocabulary columns; unseen keys are summed
/// into the OOV column.
SparseRow vectorize(const FeatureVector& fv, const Vocabulary& vocab);

/// Labeled design matrix in CSR form with a lazily built dense column copy
/// for the tree learners.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Vocabulary vocab, std::vector<std::string> classes);

  void add_row(const SparseRow& row, int label, std::string id);

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return vocab_.columns(); }
  int n_classes() const { return static_cast<int>(classes_.size()); }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& ids() const { return ids_; }

  std::span<const std::uint32_t> row_cols(std::size_t r) const;
  std::span<const double> row_vals(std::size_t r) const;
  void dense_row(std::size_t r, std::vector<double>& out) const;

  /// Column-major dense copy, built once and shared (thread-safe).
  const std::vector<std::vector<double>>& columns() const;

 private:
  Vocabulary vocab_;
  std::vector<std::string> classes_;
  std::vector<std::size_t> row_ptr_ = {0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<std::string> ids_;
  mutable std::shared_ptr<std::once_flag> dense_once_ = std::make_shared<std::once_flag>();
  mutable std::shared_ptr<std::vector<std::vector<double>>> dense_ = std::make_shared<std::vector<std::vector<double>>>();
};

/// Names of the eight target groups in class-index order.
std::vector<std::string> selected_group_names();

/// Keeps rows whose tx_hash carries one of `classes`; builds the vocabulary
/// from those rows unless one is supplied. Throws InputError when a class
/// has no rows.
Dataset make_dataset(const std::vector<FeatureVector>& rows,
                     const std::unordered_map<std::string, MethodGroup>& labels,
                     const std::vector<std::string>& classes, const Vocabulary* vocab = nullptr,
                     bool require_all_classes = true);

}  // namespace motifscope
