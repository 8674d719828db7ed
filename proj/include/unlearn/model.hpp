#pragma once

#include <memory>

#include "unlearn/dataset.hpp"
#include "unlearn/types.hpp"

namespace unlearn {

// Numerically stable pieces of the logistic loss.
double sigmoid(double m);
double softplus(double m);  // log(1 + e^m)

// Binary cross-entropy at one sample plus the per-sample ridge share
// (l2_reg/2)*|theta|^2. The intercept never enters the ridge.
double sample_loss(const Sample& z, const ModelParams& m, double l2_reg);

// Gradient with respect to (theta, b) jointly, intercept coordinate last:
// ((sigma - y) x + l2_reg * theta, sigma - y).
Vector sample_gradient(const Sample& z, const ModelParams& m, double l2_reg);

// Materialized training rows in dataset order, features extended with a
// trailing 1 so (theta, b) acts as one joint vector.
struct TrainView {
  RowMatrix Xe;  // n x (d+1), last column all ones
  Vector y;

  Index n() const { return Xe.rows(); }
  Index dim() const { return Xe.cols() - 1; }

  static TrainView from(const Dataset& ds);
  // Training split with the sample at position `drop` (in training order)
  // removed.
  static TrainView without(const Dataset& ds, Index drop);
};

// Weighted empirical risk (1/n) sum_i w_i * loss_i over a view; w == nullptr
// means unit weights. The per-sample loss carries its ridge share, so the
// effective ridge scales with the mean weight, exactly as reweighting the
// loss demands.
double mean_loss(const TrainView& v, const ModelParams& m, double l2_reg,
                 const Vector* w = nullptr);
Vector mean_gradient(const TrainView& v, const ModelParams& m, double l2_reg,
                     const Vector* w = nullptr);
Matrix hessian(const TrainView& v, const ModelParams& m,
               const TrainConfig& cfg, const Vector* w = nullptr);

// Mean-loss Hessian over the training split:
// (1/n) sum_i s_i(1-s_i) xe_i xe_i^T + diag(l2 on theta, 0 on b) + damping*I.
Matrix hessian(const Dataset& ds, const ModelParams& m, const TrainConfig& cfg);
Vector mean_gradient(const Dataset& ds, const ModelParams& m, double l2_reg);

// Per-sample training-loss gradients, one row per sample: rows are
// (sigma-y) xe + l2 (theta, 0).
RowMatrix per_sample_gradients(const TrainView& v, const ModelParams& m,
                               double l2_reg);

// Direct Cholesky solve with a residual contract:
// |h u - v|_inf <= 1e-8 (1 + |v|_inf). Throws NumericalError naming the
// smallest eigenvalue estimate when h is not positive definite.
Vector solve_hinv(const Matrix& h, const Vector& v);

// Cached factorization of the mean-loss Hessian at a parameter snapshot.
// Influence tables and Newton corrections built from it refuse to be applied
// at any other parameters.
class HessianFactor {
 public:
  HessianFactor(Matrix h, ModelParams snapshot);
  Vector solve(const Vector& v) const;
  const Matrix& matrix() const { return h_; }
  const ModelParams& snapshot() const { return snap_; }

 private:
  Eigen::LLT<Matrix> llt_;
  Matrix h_;
  ModelParams snap_;
};

std::shared_ptr<const HessianFactor> factor_hessian(const Dataset& ds,
                                                    const ModelParams& m,
                                                    const TrainConfig& cfg);

// Damped-Newton minimization of the (optionally weighted) empirical risk
// with backtracking line search, to |mean gradient|_inf <= grad_tol, then a
// short gradient-norm polish toward the rounding floor so retrain oracles are
// start-independent. Deterministic for identical inputs.
ModelParams train(const Dataset& ds, const TrainConfig& cfg,
                  const ModelParams& init);
ModelParams train_view(const TrainView& v, const TrainConfig& cfg,
                       const ModelParams& init, const Vector* w = nullptr);

}  // namespace unlearn
