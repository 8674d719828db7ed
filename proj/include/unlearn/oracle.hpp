#pragma once

#include <optional>
#include <vector>

#include "unlearn/engine.hpp"

namespace unlearn {

// Ground-truth retraining oracles. Both converge to a tighter gradient bound
// than ordinary training (cfg.grad_tol / 10, then polish), so results are
// start-independent.

// Minimizer over the training split without the sample at training-order
// position j. Warm-starting from the full-data minimizer only speeds it up.
ModelParams loo_retrain(const Dataset& ds, Index j, const TrainConfig& cfg,
                        const ModelParams& warm);

// Exact minimizer of the reweighted empirical risk
// (1/n) sum_i (1 + eps_i) loss_i. Weights below -1 (negative effective
// weight) get a warning and a best-effort solve.
ModelParams weighted_retrain(const Dataset& ds, const WeightVector& w,
                             const TrainConfig& cfg);
ModelParams weighted_retrain(const Dataset& ds, const Vector& eps,
                             const TrainConfig& cfg);

// Correlation statistics. Both reject constant inputs (the coefficient is
// undefined); spearman uses average ranks on ties.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);
double spearman(const std::vector<double>& xs, const std::vector<double>& ys);

struct LooRecord {
  Index index;  // training-order position
  // post-removal minus pre-removal, on the validation split (what the
  // influence estimate targets) and the test split (reporting)
  double actual_delta_util = 0.0;
  double actual_delta_metric = 0.0;
  double actual_delta_util_test = 0.0;
  double actual_delta_metric_test = 0.0;
  double est_util = 0.0;    // i_util[j]
  double est_metric = 0.0;  // i_metric[j]
};

struct CorrelationSummary {
  MetricKind metric_kind = MetricKind::DP;
  double pearson_util = 0.0, spearman_util = 0.0;
  double pearson_metric = 0.0, spearman_metric = 0.0;
  // Spearman between the actual utility and metric deltas across samples
  double util_metric_spearman_val = 0.0;
  double util_metric_spearman_test = 0.0;
};

struct CorrelationResult {
  std::vector<LooRecord> records;
  CorrelationSummary summary;
};

// Full leave-one-out sweep over the training split; one retrain per sample.
// Guarded by `cap` unless override_cap is set.
CorrelationResult run_correlation_experiment(const Dataset& ds,
                                             const TrainConfig& cfg,
                                             MetricKind kind, double gamma,
                                             Index cap = 2000,
                                             bool override_cap = false);

enum class Algorithm { If, GaFt };
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct BenchResult {
  std::string scheme;     // "hard" or "soft"
  std::string algorithm;  // "if" or "ga_ft"
  MetricsSnapshot before, after;
  bool free_lunch = false;  // metric and utility both strictly improved
};

struct SweepRow {
  double rate = 0.0;  // hard removal fraction
  MetricsSnapshot after;
};

struct BenchOutput {
  std::vector<BenchResult> results;
  std::vector<SweepRow> sweep;  // hard-IF deletion-rate sweep, 0%..30%
  MetricsSnapshot before;
};

// Hard and soft variants of each algorithm under identical epoch and
// learning-rate budgets, plus the deletion-rate sweep for the hard scheme.
BenchOutput run_benchmark(const Dataset& ds,
                          const std::vector<Algorithm>& algorithms,
                          const UnlearnConfig& base, const TrainConfig& tcfg,
                          MetricKind kind, double gamma = 1.5,
                          double lambda = 1.0,
                          std::optional<double> delta_override = {});

}  // namespace unlearn
