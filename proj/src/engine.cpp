#include "unlearn/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "unlearn/kernels.hpp"

namespace unlearn {

const char* to_string(Method m) {
  switch (m) {
    case Method::SoftIf:
      return "soft_if";
    case Method::SoftGd:
      return "soft_gd";
    case Method::HardIf:
      return "hard_if";
    case Method::HardGaFt:
      return "hard_ga_ft";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "soft_if") return Method::SoftIf;
  if (s == "soft_gd") return Method::SoftGd;
  if (s == "hard_if") return Method::HardIf;
  if (s == "hard_ga_ft") return Method::HardGaFt;
  throw DataError("unknown unlearning method: '" + s + "'");
}

void UnlearnConfig::validate() const {
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (!(lr_descent > 0) || !(lr_ascent > 0))
    throw DataError("learning rates must be positive");
  if (hard_removal_fraction < 0 || hard_removal_fraction > 1)
    throw DataError("hard_removal_fraction must lie in [0, 1]");
}

double metric_of(const MetricsSnapshot& s, MetricKind k) {
  switch (k) {
    case MetricKind::DP:
      return s.dp;
    case MetricKind::EOP:
      return s.eop;
    case MetricKind::Robustness:
      return s.robustness_loss;
  }
  return 0.0;
}

ModelParams apply_weighted_newton(const ModelParams& m, const WeightVector& w,
                                  const Dataset& ds, const TrainConfig& cfg,
                                  const HessianFactor* cached) {
  cfg.validate();
  if (w.snapshot && !w.snapshot->same_as(m))
    throw NumericalError(
        "stale weights: weight vector was solved at a different parameter "
        "snapshot");
  TrainView v = TrainView::from(ds);
  if (w.eps.size() != v.n())
    throw std::invalid_argument("weight vector length mismatch");

  RowMatrix grads = per_sample_gradients(v, m, cfg.l2_reg);
  Vector s(grads.cols());
  kernels::weighted_feature_sum(grads.data(),
                                static_cast<std::size_t>(grads.rows()),
                                static_cast<std::size_t>(grads.cols()),
                                w.eps.data(), s.data());

  Vector delta;
  if (cached && cached->snapshot().same_as(m)) {
    delta = cached->solve(s);
  } else {
    HessianFactor factor(hessian(v, m, cfg), m);
    delta = factor.solve(s);
  }
  const double inv_n = 1.0 / static_cast<double>(v.n());
  Vector jm = m.joint();
  for (Index i = 0; i < jm.size(); ++i) jm[i] = jm[i] - inv_n * delta[i];
  return ModelParams::from_joint(jm);
}

ModelParams apply_weighted_gradient(const ModelParams& m, const Vector& eps,
                                    const Dataset& ds, const TrainConfig& cfg,
                                    int epochs, double lr) {
  cfg.validate();
  if (epochs < 1) throw DataError("epochs must be >= 1");
  if (!(lr > 0)) throw DataError("learning rate must be positive");
  TrainView v = TrainView::from(ds);
  if (eps.size() != v.n())
    throw std::invalid_argument("weight vector length mismatch");

  const double n = static_cast<double>(v.n());
  const double guard = 10.0 * std::max(mean_loss(v, m, cfg.l2_reg), 1e-3);
  double eps_mean = kernels::sum(eps.data(), static_cast<std::size_t>(v.n())) / n;

  ModelParams cur = m;
  Vector jm = cur.joint();
  Vector margins(v.n()), r(v.n());
  for (int t = 0; t < epochs; ++t) {
    kernels::margins(v.Xe.data(), static_cast<std::size_t>(v.n()),
                     static_cast<std::size_t>(v.Xe.cols()), jm.data(), 0.0,
                     margins.data());
    for (Index i = 0; i < v.n(); ++i)
      r[i] = eps[i] * (sigmoid(margins[i]) - v.y[i]) / n;
    Vector g(v.Xe.cols());
    kernels::weighted_feature_sum(v.Xe.data(), static_cast<std::size_t>(v.n()),
                                  static_cast<std::size_t>(v.Xe.cols()),
                                  r.data(), g.data());
    g.head(v.dim()) += cfg.l2_reg * eps_mean * cur.theta;
    jm -= lr * g;
    cur = ModelParams::from_joint(jm);
    double l = mean_loss(v, cur, cfg.l2_reg);
    if (!std::isfinite(l) || l > guard)
      throw ConvergenceError(
          "weighted gradient rounds diverged at epoch " + std::to_string(t) +
              ": training loss " + std::to_string(l) + " exceeds guard " +
              std::to_string(guard),
          l);
  }
  return cur;
}

WeightVector hard_weights(const InfluenceTable& it, HardMode mode,
                          double fraction) {
  if (fraction < 0 || fraction > 1)
    throw DataError("removal fraction must lie in [0, 1]");
  const Index n = it.n();
  const Index k = static_cast<Index>(
      std::floor(fraction * static_cast<double>(n)));
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return it.i_metric[a] < it.i_metric[b];
  });
  WeightVector w;
  w.case_id = 0;
  w.snapshot = it.model_snapshot;
  w.eps = mode == HardMode::GaFt ? Vector::Ones(n) : Vector::Zero(n);
  for (Index p = 0; p < k; ++p) w.eps[order[p]] = -1.0;
  return w;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

MetricsSnapshot snapshot_metrics(const EvalSet& testset,
                                 const AdversarialSet& adv_test,
                                 const ModelParams& m) {
  MetricsSnapshot s;
  s.utility_loss = utility_loss(testset, m);
  s.test_accuracy = accuracy(testset, m);
  s.dp = demographic_parity(testset, m);
  s.eop = equal_opportunity(testset, m);
  s.robustness_loss = robustness_loss(adv_test, m);
  return s;
}

double validation_metric(MetricKind kind, const EvalSet& valset,
                         const AdversarialSet& adv_val, const ModelParams& m) {
  switch (kind) {
    case MetricKind::DP:
      return demographic_parity(valset, m);
    case MetricKind::EOP:
      return equal_opportunity(valset, m);
    case MetricKind::Robustness:
      return robustness_loss(adv_val, m);
  }
  return 0.0;
}

}  // namespace

FrameworkResult run_framework(const Dataset& ds, const EvalSet& valset,
                              const EvalSet& testset,
                              const UnlearnConfig& ucfg,
                              const TrainConfig& tcfg, MetricKind kind,
                              double gamma, double lambda,
                              std::optional<double> delta_override) {
  ucfg.validate();
  tcfg.validate();
  if (!(gamma > 1.0)) throw DataError("gamma must be > 1");

  FrameworkResult out;
  UnlearnReport& rep = out.report;
  rep.method = ucfg.method;
  rep.metric_kind = kind;
  rep.qp_lambda = lambda;

  ModelParams theta0 = train(ds, tcfg, ModelParams::zeros(ds.dim()));
  out.original_model = theta0;
  AdversarialSet adv_val = craft_adversarial(valset, theta0, gamma);
  AdversarialSet adv_test = craft_adversarial(testset, theta0, gamma);
  rep.before = snapshot_metrics(testset, adv_test, theta0);

  const bool soft =
      ucfg.method == Method::SoftIf || ucfg.method == Method::SoftGd;

  // Step 1: influence evaluation.
  auto t0 = Clock::now();
  try {
    out.table = influence_scores(ds, valset, &adv_val, theta0, tcfg, kind);
  } catch (const DataError& e) {
    throw FrameworkError("evaluate", e.what(), rep, true);
  } catch (const std::exception& e) {
    throw FrameworkError("evaluate", e.what(), rep, false);
  }
  rep.seconds.evaluate = seconds_since(t0);
  rep.n_train = out.table.n();

  // Step 2: weight discovery. The over-correction bound is a Step-1-style
  // evaluation; only the solver itself is timed as "optimize".
  double delta = 0.0;
  if (soft)
    delta = delta_override ? *delta_override
                           : validation_metric(kind, valset, adv_val, theta0);
  t0 = Clock::now();
  try {
    if (soft) {
      QpInstance q = qp_from_table(out.table, lambda, delta);
      out.weights = solve_analytic(q);
      out.weights.snapshot = theta0;
      rep.qp_delta = delta;
    } else {
      out.weights = hard_weights(
          out.table,
          ucfg.method == Method::HardIf ? HardMode::IfRemoval : HardMode::GaFt,
          ucfg.hard_removal_fraction);
    }
  } catch (const DataError& e) {
    throw FrameworkError("optimize", e.what(), rep, true);
  } catch (const std::exception& e) {
    throw FrameworkError("optimize", e.what(), rep, false);
  }
  rep.seconds.optimize = seconds_since(t0);

  rep.qp_case = out.weights.case_id;
  rep.qp_beta1 = out.weights.dual_beta1;
  rep.qp_beta2 = out.weights.dual_beta2;
  if (soft)
    rep.case_histogram[static_cast<std::size_t>(out.weights.case_id - 1)] =
        out.table.n();
  // sum_i I(z_i; eps_i) = -eps^T I(.;-1)
  rep.linearized_utility_change =
      -kernels::dot(out.weights.eps.data(), out.table.i_util.data(),
                    static_cast<std::size_t>(out.table.n()));
  rep.predicted_metric_change =
      -kernels::dot(out.weights.eps.data(), out.table.i_metric.data(),
                    static_cast<std::size_t>(out.table.n()));

  // Step 3: model correction, gated on the validation metric.
  double gate = validation_metric(kind, valset, adv_val, theta0);
  ModelParams theta1 = theta0;
  t0 = Clock::now();
  if (gate > ucfg.delta_threshold) {
    try {
      switch (ucfg.method) {
        case Method::SoftIf:
        case Method::HardIf:
          theta1 = apply_weighted_newton(theta0, out.weights, ds, tcfg,
                                         out.table.hinv.get());
          break;
        case Method::SoftGd:
          theta1 = apply_weighted_gradient(theta0, out.weights.eps, ds, tcfg,
                                           ucfg.epochs, ucfg.lr_descent);
          break;
        case Method::HardGaFt: {
          // Ascent on the forget set for the first half of the budget, then
          // fine-tuning on the rest.
          Vector ga = Vector::Zero(out.weights.eps.size());
          Vector ft = Vector::Zero(out.weights.eps.size());
          for (Index i = 0; i < out.weights.eps.size(); ++i) {
            if (out.weights.eps[i] < 0)
              ga[i] = -1.0;
            else
              ft[i] = 1.0;
          }
          int ga_epochs = ucfg.epochs / 2;
          ModelParams mid =
              ga_epochs > 0 ? apply_weighted_gradient(theta0, ga, ds, tcfg,
                                                      ga_epochs, ucfg.lr_ascent)
                            : theta0;
          theta1 = apply_weighted_gradient(mid, ft, ds, tcfg,
                                           ucfg.epochs - ga_epochs,
                                           ucfg.lr_descent);
          break;
        }
      }
      rep.corrected = true;
    } catch (const DataError& e) {
      throw FrameworkError("correct", e.what(), rep, true);
    } catch (const std::exception& e) {
      throw FrameworkError("correct", e.what(), rep, false);
    }
  }
  rep.seconds.correct = seconds_since(t0);

  out.corrected_model = theta1;
  rep.after = snapshot_metrics(testset, adv_test, theta1);
  return out;
}

FrameworkResult run_framework(const Dataset& ds, const UnlearnConfig& ucfg,
                              const TrainConfig& tcfg, MetricKind kind,
                              double gamma, double lambda,
                              std::optional<double> delta_override) {
  EvalSet valset = EvalSet::from(ds, Split::Validation);
  EvalSet testset = EvalSet::from(ds, Split::Test);
  return run_framework(ds, valset, testset, ucfg, tcfg, kind, gamma, lambda,
                       delta_override);
}

}  // namespace unlearn
