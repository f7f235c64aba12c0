#include "motifscope/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "motifscope/util.hpp"

namespace motifscope {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double max_abs(std::span<const double> a) {
  double m = 0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

BinaryLogisticObjective::BinaryLogisticObjective(const Dataset& data, std::span<const std::size_t> rows,
                                                 std::vector<double> targets, std::vector<double> sample_weights,
                                                 double l2)
    : data_(data), rows_(rows), targets_(std::move(targets)), weights_(std::move(sample_weights)), l2_(l2) {}

double BinaryLogisticObjective::value(std::span<const double> params) const {
  const std::size_t nf = data_.cols();
  const double b = params[nf];
  double f = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto c = data_.row_cols(rows_[i]);
    const auto v = data_.row_vals(rows_[i]);
    double z = b;
    for (std::size_t k = 0; k < c.size(); ++k) z += params[c[k]] * v[k];
    f += weights_[i] * (softplus(z) - targets_[i] * z);
  }
  double reg = 0;
  for (std::size_t j = 0; j < nf; ++j) reg += params[j] * params[j];
  return f + 0.5 * l2_ * reg;
}

double BinaryLogisticObjective::value_and_gradient(std::span<const double> params, std::span<double> grad) const {
  const std::size_t nf = data_.cols();
  const double b = params[nf];
  std::fill(grad.begin(), grad.end(), 0.0);
  double f = 0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto c = data_.row_cols(rows_[i]);
    const auto v = data_.row_vals(rows_[i]);
    double z = b;
    for (std::size_t k = 0; k < c.size(); ++k) z += params[c[k]] * v[k];
    f += weights_[i] * (softplus(z) - targets_[i] * z);
    const double r = weights_[i] * (sigmoid(z) - targets_[i]);
    for (std::size_t k = 0; k < c.size(); ++k) grad[c[k]] += r * v[k];
    grad[nf] += r;
  }
  double reg = 0;
  for (std::size_t j = 0; j < nf; ++j) {
    reg += params[j] * params[j];
    grad[j] += l2_ * params[j];
  }
  return f + 0.5 * l2_ * reg;
}

LbfgsResult minimize_lbfgs(const BinaryLogisticObjective& f, std::vector<double>& x, int max_iter, double tol,
                           int memory) {
  const std::size_t n = x.size();
  std::vector<double> g(n), x_new(n), g_new(n), dir(n);
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  LbfgsResult res;
  res.value = f.value_and_gradient(x, g);

  for (int it = 0; it < max_iter; ++it) {
    if (max_abs(g) <= tol * std::max(1.0, std::abs(res.value))) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    dir = g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha[k] * y_hist[k][j];
    }
    if (!s_hist.empty()) {
      const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
      for (auto& d : dir) d *= gamma;
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * dot(y_hist[k], dir);
      for (std::size_t j = 0; j < n; ++j) dir[j] += s_hist[k][j] * (alpha[k] - beta);
    }
    for (auto& d : dir) d = -d;
    double slope = dot(g, dir);
    if (slope >= 0) {  // not a descent direction: restart from steepest descent
      for (std::size_t j = 0; j < n; ++j) dir[j] = -g[j];
      slope = -dot(g, g);
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-12, max_abs(g))) : 1.0;
    double f_new = 0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n; ++j) x_new[j] = x[j] + step * dir[j];
      f_new = f.value_and_gradient(x_new, g_new);
      if (f_new <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;

    std::vector<double> s(n), y(n);
    for (std::size_t j = 0; j < n; ++j) {
      s[j] = x_new[j] - x[j];
      y[j] = g_new[j] - g[j];
    }
    const double sy = dot(s, y);
    const double decrease = res.value - f_new;
    x.swap(x_new);
    g.swap(g_new);
    res.value = f_new;
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (decrease <= 1e-14 * std::max(1.0, std::abs(res.value))) {
      res.converged = max_abs(g) <= std::sqrt(tol) * std::max(1.0, std::abs(res.value));
      break;
    }
  }
  if (!res.converged && max_abs(g) <= tol * std::max(1.0, std::abs(res.value))) res.converged = true;
  return res;
}

std::vector<double> LogisticModel::scores(std::span<const std::uint32_t> cols, std::span<const double> vals) const {
  std::vector<double> out(bias);
  for (std::size_t c = 0; c < weights.size(); ++c) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] < weights[c].size()) out[c] += weights[c][cols[k]] * vals[k];
    }
  }
  return out;
}

int LogisticModel::predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const {
  const auto s = scores(cols, vals);
  return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
}

LogisticModel fit_logistic(const Dataset& data, std::span<const std::size_t> rows,
                           std::span<const double> class_weights, const LogisticParams& params) {
  if (params.scale) {
    std::vector<double> factor(data.cols(), 0.0);
    for (auto r : rows) {
      const auto c = data.row_cols(r);
      const auto v = data.row_vals(r);
      for (std::size_t i = 0; i < c.size(); ++i) factor[c[i]] = std::max(factor[c[i]], std::abs(v[i]));
    }
    for (auto& f : factor) f = f > 0 ? f : 1.0;
    Dataset scaled(data.vocabulary(), data.classes());
    for (auto r : rows) {
      SparseRow row;
      const auto c = data.row_cols(r);
      const auto v = data.row_vals(r);
      row.cols.assign(c.begin(), c.end());
      for (std::size_t i = 0; i < c.size(); ++i) row.vals.push_back(v[i] / factor[c[i]]);
      scaled.add_row(row, data.labels()[r], data.ids()[r]);
    }
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto unscaled = params;
    unscaled.scale = false;
    auto model = fit_logistic(scaled, all, class_weights, unscaled);
    model.params = params;
    for (auto& w : model.weights) {
      for (std::size_t j = 0; j < w.size(); ++j) w[j] /= factor[j];
    }
    return model;
  }
  LogisticModel model;
  model.params = params;
  const int k = data.n_classes();
  std::vector<double> sw(rows.size());
  double total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sw[i] = class_weights[static_cast<std::size_t>(data.labels()[rows[i]])];
    total += sw[i];
  }
  if (total > 0) {
    const double scale = static_cast<double>(rows.size()) / total;
    for (auto& w : sw) w *= scale;
  }
  for (int c = 0; c < k; ++c) {
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = data.labels()[rows[i]] == c ? 1.0 : 0.0;
    BinaryLogisticObjective obj(data, rows, std::move(y), sw, params.l2);
    std::vector<double> x(obj.dimension(), 0.0);
    const auto res = minimize_lbfgs(obj, x, params.max_iter, params.tol);
    if (!res.converged) {
      warn("logistic regression for class " + data.classes()[static_cast<std::size_t>(c)] +
           " did not converge within " + std::to_string(params.max_iter) + " iterations; using best iterate");
      model.converged = false;
    }
    model.bias.push_back(x.back());
    x.pop_back();
    model.weights.push_back(std::move(x));
  }
  return model;
}

}  // namespace motifscope
