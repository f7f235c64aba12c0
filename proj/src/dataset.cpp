#include "motifscope/dataset.hpp"

#include <algorithm>
#include <map>

namespace motifscope {

SparseRow vectorize(const FeatureVector& fv, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> acc;
  for (const auto& [key, count] : fv.features) {
    if (count == 0) continue;
    const auto idx = vocab.index(key);
    acc[static_cast<std::uint32_t>(idx ? *idx : vocab.oov_column())] += static_cast<double>(count);
  }
  SparseRow row;
  row.cols.reserve(acc.size());
  row.vals.reserve(acc.size());
  for (const auto& [c, v] : acc) {
    row.cols.push_back(c);
    row.vals.push_back(v);
  }
  return row;
}

Dataset::Dataset(Vocabulary vocab, std::vector<std::string> classes)
    : vocab_(std::move(vocab)), classes_(std::move(classes)) {}

void Dataset::add_row(const SparseRow& row, int label, std::string id) {
  col_idx_.insert(col_idx_.end(), row.cols.begin(), row.cols.end());
  values_.insert(values_.end(), row.vals.begin(), row.vals.end());
  row_ptr_.push_back(col_idx_.size());
  labels_.push_back(label);
  ids_.push_back(std::move(id));
}

std::span<const std::uint32_t> Dataset::row_cols(std::size_t r) const {
  return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

std::span<const double> Dataset::row_vals(std::size_t r) const {
  return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
}

void Dataset::dense_row(std::size_t r, std::vector<double>& out) const {
  out.assign(cols(), 0.0);
  const auto c = row_cols(r);
  const auto v = row_vals(r);
  for (std::size_t i = 0; i < c.size(); ++i) out[c[i]] = v[i];
}

const std::vector<std::vector<double>>& Dataset::columns() const {
  std::call_once(*dense_once_, [this] {
    dense_->assign(cols(), std::vector<double>(rows(), 0.0));
    for (std::size_t r = 0; r < rows(); ++r) {
      const auto c = row_cols(r);
      const auto v = row_vals(r);
      for (std::size_t i = 0; i < c.size(); ++i) (*dense_)[c[i]][r] = v[i];
    }
  });
  return *dense_;
}

std::vector<std::string> selected_group_names() {
  std::vector<std::string> out;
  for (auto g : kSelectedGroups) out.emplace_back(group_name(g));
  return out;
}

Dataset make_dataset(const std::vector<FeatureVector>& rows,
                     const std::unordered_map<std::string, MethodGroup>& labels,
                     const std::vector<std::string>& classes, const Vocabulary* vocab, bool require_all_classes) {
  std::vector<const FeatureVector*> kept;
  std::vector<int> y;
  for (const auto& fv : rows) {
    auto it = labels.find(fv.tx_hash);
    if (it == labels.end()) continue;
    const auto name = group_name(it->second);
    auto c = std::find(classes.begin(), classes.end(), name);
    if (c == classes.end()) continue;
    kept.push_back(&fv);
    y.push_back(static_cast<int>(c - classes.begin()));
  }
  if (require_all_classes) {
    std::vector<std::size_t> counts(classes.size(), 0);
    for (int label : y) ++counts[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (counts[c] == 0) throw InputError("no labeled rows for class \"" + classes[c] + "\"");
    }
  }
  Dataset d(vocab ? *vocab : Vocabulary::build(kept), classes);
  for (std::size_t i = 0; i < kept.size(); ++i) d.add_row(vectorize(*kept[i], d.vocabulary()), y[i], kept[i]->tx_hash);
  return d;
}

}  // namespace motifscope
