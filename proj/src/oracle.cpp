#include "unlearn/oracle.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iostream>
#include <numeric>
#include <utility>

namespace unlearn {

namespace {

TrainConfig oracle_cfg(const TrainConfig& cfg) {
  TrainConfig c = cfg;
  c.grad_tol = cfg.grad_tol / 10.0;  // deltas are small; converge tighter
  c.max_iters = std::max(cfg.max_iters, 200);
  return c;
}

}  // namespace

ModelParams loo_retrain(const Dataset& ds, Index j, const TrainConfig& cfg,
                        const ModelParams& warm) {
  cfg.validate();
  TrainView v = TrainView::without(ds, j);
  if (v.n() < 1) throw DataError("leave-one-out needs at least two samples");
  return train_view(v, oracle_cfg(cfg), warm);
}

ModelParams weighted_retrain(const Dataset& ds, const Vector& eps,
                             const TrainConfig& cfg) {
  cfg.validate();
  TrainView v = TrainView::from(ds);
  if (eps.size() != v.n())
    throw std::invalid_argument("weight vector length mismatch");
  Vector w(v.n());
  bool negative = false;
  for (Index i = 0; i < v.n(); ++i) {
    w[i] = 1.0 + eps[i];
    if (w[i] < 0) negative = true;
  }
  if (negative)
    std::cerr << "[unlearn] warning: some effective weights 1+eps are "
                 "negative; solving best-effort\n";
  return train_view(v, oracle_cfg(cfg), ModelParams::zeros(ds.dim()), &w);
}

ModelParams weighted_retrain(const Dataset& ds, const WeightVector& w,
                             const TrainConfig& cfg) {
  return weighted_retrain(ds, w.eps, cfg);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("correlation inputs differ in length");
  const std::size_t n = xs.size();
  if (n < 2) throw DataError("correlation needs at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DataError("correlation undefined for constant input");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("correlation inputs differ in length");
  if (xs.size() < 2) throw DataError("correlation needs at least two points");
  return pearson(average_ranks(xs), average_ranks(ys));
}

namespace {

double eval_metric(MetricKind kind, const EvalSet& t, const AdversarialSet& adv,
                   const ModelParams& m) {
  switch (kind) {
    case MetricKind::DP:
      return demographic_parity(t, m);
    case MetricKind::EOP:
      return equal_opportunity(t, m);
    case MetricKind::Robustness:
      return robustness_loss(adv, m);
  }
  return 0.0;
}

}  // namespace

CorrelationResult run_correlation_experiment(const Dataset& ds,
                                             const TrainConfig& cfg,
                                             MetricKind kind, double gamma,
                                             Index cap, bool override_cap) {
  cfg.validate();
  TrainView v = TrainView::from(ds);
  if (v.n() > cap && !override_cap)
    throw DataError("full leave-one-out over " + std::to_string(v.n()) +
                    " samples exceeds the cap of " + std::to_string(cap) +
                    "; pass the override to proceed");

  ModelParams theta0 = train(ds, cfg, ModelParams::zeros(ds.dim()));
  EvalSet valset = EvalSet::from(ds, Split::Validation);
  EvalSet testset = EvalSet::from(ds, Split::Test);
  AdversarialSet adv_val = craft_adversarial(valset, theta0, gamma);
  AdversarialSet adv_test = craft_adversarial(testset, theta0, gamma);

  InfluenceTable table =
      influence_scores(ds, valset, &adv_val, theta0, cfg, kind);

  const double base_util_val = utility_loss(valset, theta0);
  const double base_util_test = utility_loss(testset, theta0);
  const double base_metric_val = eval_metric(kind, valset, adv_val, theta0);
  const double base_metric_test = eval_metric(kind, testset, adv_test, theta0);

  CorrelationResult out;
  out.records.reserve(static_cast<std::size_t>(v.n()));
  for (Index j = 0; j < v.n(); ++j) {
    ModelParams mj = loo_retrain(ds, j, cfg, theta0);
    LooRecord r;
    r.index = j;
    r.actual_delta_util = utility_loss(valset, mj) - base_util_val;
    r.actual_delta_metric = eval_metric(kind, valset, adv_val, mj) -
                            base_metric_val;
    r.actual_delta_util_test = utility_loss(testset, mj) - base_util_test;
    r.actual_delta_metric_test = eval_metric(kind, testset, adv_test, mj) -
                                 base_metric_test;
    r.est_util = table.i_util[j];
    r.est_metric = table.i_metric[j];
    out.records.push_back(r);
  }

  std::vector<double> au, am, aut, amt, eu, em;
  for (const LooRecord& r : out.records) {
    au.push_back(r.actual_delta_util);
    am.push_back(r.actual_delta_metric);
    aut.push_back(r.actual_delta_util_test);
    amt.push_back(r.actual_delta_metric_test);
    eu.push_back(r.est_util);
    em.push_back(r.est_metric);
  }
  out.summary.metric_kind = kind;
  out.summary.pearson_util = pearson(eu, au);
  out.summary.spearman_util = spearman(eu, au);
  out.summary.pearson_metric = pearson(em, am);
  out.summary.spearman_metric = spearman(em, am);
  out.summary.util_metric_spearman_val = spearman(au, am);
  out.summary.util_metric_spearman_test = spearman(aut, amt);
  return out;
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::If:
      return "if";
    case Algorithm::GaFt:
      return "ga_ft";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "if") return Algorithm::If;
  if (s == "ga_ft") return Algorithm::GaFt;
  throw DataError("unknown algorithm: '" + s + "'");
}

BenchOutput run_benchmark(const Dataset& ds,
                          const std::vector<Algorithm>& algorithms,
                          const UnlearnConfig& base, const TrainConfig& tcfg,
                          MetricKind kind, double gamma, double lambda,
                          std::optional<double> delta_override) {
  BenchOutput out;
  bool have_before = false;
  for (Algorithm algo : algorithms) {
    // Same budget for both schemes of one algorithm, by construction.
    UnlearnConfig hard = base;
    UnlearnConfig soft = base;
    hard.method = algo == Algorithm::If ? Method::HardIf : Method::HardGaFt;
    soft.method = algo == Algorithm::If ? Method::SoftIf : Method::SoftGd;
    // both schemes must consume the same budget
    assert(hard.epochs == soft.epochs &&
           hard.lr_descent == soft.lr_descent &&
           hard.lr_ascent == soft.lr_ascent);
    const std::pair<const char*, const UnlearnConfig*> runs[] = {
        {"hard", &hard}, {"soft", &soft}};
    for (const auto& [scheme, cfg_ptr] : runs) {
      const UnlearnConfig& cfg = *cfg_ptr;
      BenchResult r;
      r.scheme = scheme;
      r.algorithm = to_string(algo);
      try {
        FrameworkResult fr =
            run_framework(ds, cfg, tcfg, kind, gamma, lambda, delta_override);
        r.before = fr.report.before;
        r.after = fr.report.after;
        double dm = metric_of(r.before, kind) - metric_of(r.after, kind);
        double du = r.before.utility_loss - r.after.utility_loss;
        r.free_lunch = dm > 1e-12 && du > 1e-12;
        if (!have_before) {
          out.before = r.before;
          have_before = true;
        }
        out.results.push_back(r);
      } catch (const FrameworkError& e) {
        std::cerr << "[unlearn] benchmark: " << r.scheme << "/" << r.algorithm
                  << " failed: " << e.what() << "\n";
      }
    }
  }

  // Deletion-rate sweep for the hard scheme (influence-function removal).
  for (double rate : {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30}) {
    UnlearnConfig cfg = base;
    cfg.method = Method::HardIf;
    cfg.hard_removal_fraction = rate;
    FrameworkResult fr =
        run_framework(ds, cfg, tcfg, kind, gamma, lambda, delta_override);
    if (!have_before) {
      out.before = fr.report.before;
      have_before = true;
    }
    out.sweep.push_back({rate, fr.report.after});
  }
  return out;
}

}  // namespace unlearn
