#pragma once

#include <memory>

#include "unlearn/metrics.hpp"
#include "unlearn/model.hpp"

namespace unlearn {

// Per-training-sample influence scalars at eps = -1. Row j of the table
// estimates how removing training sample j (in training-split order) changes
// the validation utility and the chosen metric:
//   i_util[j]   = sum_{z in T} grad l(z)^T  H^{-1} grad l(z_j)
//   i_metric[j] = grad f_metric(T)^T        H^{-1} grad l(z_j)
// computed as one left solve per functional followed by n dot products.
// The table pins the parameter snapshot and Hessian factorization it was
// built from; consumers refuse to apply it elsewhere.
struct InfluenceTable {
  Vector i_util;
  Vector i_metric;
  MetricKind metric_kind = MetricKind::DP;
  ModelParams model_snapshot;
  std::shared_ptr<const HessianFactor> hinv;

  Index n() const { return i_util.size(); }
};

// i[j] = (H^{-1} v)^T grads.row(j); the building block behind the table.
Vector influence_against(const Vector& v, const RowMatrix& grads,
                         const HessianFactor& factor);

// Predicted parameter change theta_hat(z_j; -1) - theta_hat, i.e.
// (1/n) H^{-1} grad l(z_j; theta_hat). Requires m to be a minimizer
// (mean-gradient norm within cfg.grad_tol).
Vector influence_param(Index j, const Dataset& ds, const ModelParams& m,
                       const TrainConfig& cfg);

// adv may be null unless metric_kind == Robustness.
InfluenceTable influence_scores(const Dataset& ds, const EvalSet& valset,
                                const AdversarialSet* adv,
                                const ModelParams& m, const TrainConfig& cfg,
                                MetricKind metric_kind);

// I(z; eps) = -eps * I(z; -1).
inline double weighted_influence(double eps, double i_minus_one) {
  return -eps * i_minus_one;
}

}  // namespace unlearn
