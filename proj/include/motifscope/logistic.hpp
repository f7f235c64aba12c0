#pragma once

#include <span>
#include <vector>

#include "motifscope/dataset.hpp"

namespace motifscope {

struct LogisticParams {
  double l2 = 1.0;
  int max_iter = 500;
  double tol = 1e-6;
  /// Divide each column by its max |value| on the training rows before
  /// fitting; stored weights are mapped back to raw-count space.
  bool scale = false;
};

/// Weighted, L2-regularized binary cross-entropy over a row subset:
///   f(w, b) = sum_i s_i * (softplus(z_i) - y_i z_i) + l2/2 * |w|^2,
///   z_i = w.x_i + b.
/// Parameters are laid out as [w_0 .. w_{F-1}, b]; the bias is not penalized.
class BinaryLogisticObjective {
 public:
  BinaryLogisticObjective(const Dataset& data, std::span<const std::size_t> rows, std::vector<double> targets,
                          std::vector<double> sample_weights, double l2);

  std::size_t dimension() const { return data_.cols() + 1; }
  double value(std::span<const double> params) const;
  double value_and_gradient(std::span<const double> params, std::span<double> grad) const;

 private:
  const Dataset& data_;
  std::span<const std::size_t> rows_;
  std::vector<double> targets_;
  std::vector<double> weights_;
  double l2_;
};

struct LbfgsResult {
  double value = 0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with backtracking Armijo line search. `params` holds
/// the start point on entry and the best iterate on return.
LbfgsResult minimize_lbfgs(const BinaryLogisticObjective& f, std::vector<double>& params, int max_iter, double tol,
                           int memory = 10);

/// One-vs-rest logistic regression.
struct LogisticModel {
  std::vector<std::vector<double>> weights;  ///< [class][column]
  std::vector<double> bias;
  LogisticParams params;
  bool converged = true;

  std::vector<double> scores(std::span<const std::uint32_t> cols, std::span<const double> vals) const;
  int predict(std::span<const std::uint32_t> cols, std::span<const double> vals) const;
};

/// Class weights enter as per-sample weights, rescaled to average 1 over the
/// training rows so scaling every class weight by a constant changes nothing.
LogisticModel fit_logistic(const Dataset& data, std::span<const std::size_t> rows,
                           std::span<const double> class_weights, const LogisticParams& params);

}  // namespace motifscope
