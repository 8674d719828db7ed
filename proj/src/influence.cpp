#include "unlearn/influence.hpp"

#include <cmath>

#include "unlearn/kernels.hpp"

namespace unlearn {

namespace {

void require_minimizer(const Dataset& ds, const ModelParams& m,
                       const TrainConfig& cfg) {
  double gn = mean_gradient(ds, m, cfg.l2_reg).lpNorm<Eigen::Infinity>();
  if (gn > cfg.grad_tol)
    throw NumericalError(
        "influence needs a trained minimizer: mean gradient norm " +
        std::to_string(gn) + " exceeds grad_tol " +
        std::to_string(cfg.grad_tol));
}

}  // namespace

Vector influence_against(const Vector& v, const RowMatrix& grads,
                         const HessianFactor& factor) {
  Vector w = factor.solve(v);
  Vector out(grads.rows());
  kernels::margins(grads.data(), static_cast<std::size_t>(grads.rows()),
                   static_cast<std::size_t>(grads.cols()), w.data(), 0.0,
                   out.data());
  return out;
}

Vector influence_param(Index j, const Dataset& ds, const ModelParams& m,
                       const TrainConfig& cfg) {
  cfg.validate();
  require_minimizer(ds, m, cfg);
  TrainView v = TrainView::from(ds);
  if (j < 0 || j >= v.n())
    throw DataError("sample index out of range: " + std::to_string(j));
  Sample z{Eigen::Map<const Vector>(v.Xe.row(j).data(), v.dim()), v.y[j], 0.0};
  Vector g = sample_gradient(z, m, cfg.l2_reg);
  HessianFactor factor(hessian(v, m, cfg), m);
  Vector out = factor.solve(g);
  out *= 1.0 / static_cast<double>(v.n());
  return out;
}

InfluenceTable influence_scores(const Dataset& ds, const EvalSet& valset,
                                const AdversarialSet* adv,
                                const ModelParams& m, const TrainConfig& cfg,
                                MetricKind metric_kind) {
  cfg.validate();
  require_minimizer(ds, m, cfg);
  if (metric_kind == MetricKind::Robustness && adv == nullptr)
    throw std::invalid_argument(
        "robustness influence needs an adversarial set");

  TrainView v = TrainView::from(ds);
  RowMatrix grads = per_sample_gradients(v, m, cfg.l2_reg);
  auto factor = std::make_shared<const HessianFactor>(hessian(v, m, cfg), m);

  Vector v_util = metric_gradient(FunctionalKind::Utility, valset, m);
  Vector v_metric;
  switch (metric_kind) {
    case MetricKind::DP:
      v_metric = metric_gradient(FunctionalKind::DP, valset, m);
      break;
    case MetricKind::EOP:
      v_metric = metric_gradient(FunctionalKind::EOP, valset, m);
      break;
    case MetricKind::Robustness:
      v_metric = metric_gradient(*adv, m);
      break;
  }

  InfluenceTable t;
  t.i_util = influence_against(v_util, grads, *factor);
  t.i_metric = influence_against(v_metric, grads, *factor);
  t.metric_kind = metric_kind;
  t.model_snapshot = m;
  t.hinv = std::move(factor);
  for (Index i = 0; i < t.n(); ++i)
    if (!std::isfinite(t.i_util[i]) || !std::isfinite(t.i_metric[i]))
      throw NumericalError("non-finite influence score at index " +
                           std::to_string(i));
  return t;
}

}  // namespace unlearn
