#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "unlearn/weights.hpp"

namespace unlearn {

enum class Method { SoftIf, SoftGd, HardIf, HardGaFt };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

enum class HardMode { IfRemoval, GaFt };

struct UnlearnConfig {
  Method method = Method::SoftIf;
  int epochs = 30;
  double lr_descent = 0.01;
  double lr_ascent = 5e-4;
  double delta_threshold = 0.0;         // correction runs only above this
  double hard_removal_fraction = 0.20;  // share of most harmful samples

  void validate() const;
};

struct MetricsSnapshot {
  double utility_loss = 0.0;  // summed test cross-entropy
  double test_accuracy = 0.0;
  double dp = 0.0;
  double eop = 0.0;
  double robustness_loss = 0.0;  // summed loss on the frozen adversarial set
};

double metric_of(const MetricsSnapshot& s, MetricKind k);

struct StepTimes {
  double evaluate = 0.0;  // Step 1: influence evaluation
  double optimize = 0.0;  // Step 2: weight discovery
  double correct = 0.0;   // Step 3: model correction
  double total() const { return evaluate + optimize + correct; }
};

struct UnlearnReport {
  MetricsSnapshot before, after;
  StepTimes seconds;
  Method method = Method::SoftIf;
  MetricKind metric_kind = MetricKind::DP;
  std::array<int64_t, 4> case_histogram{};  // samples per QP case (soft runs)
  double linearized_utility_change = 0.0;   // sum_i I_util(z_i; eps_i)
  double predicted_metric_change = 0.0;     // sum_i I_metric(z_i; eps_i)
  double qp_lambda = 0.0, qp_delta = 0.0;
  int qp_case = 0;
  double qp_beta1 = 0.0, qp_beta2 = 0.0;
  bool corrected = false;
  Index n_train = 0;
};

// Thrown when a framework step fails; carries the step name and whatever was
// measured before the failure.
struct FrameworkError : std::runtime_error {
  FrameworkError(std::string step_, const std::string& what,
                 UnlearnReport partial_, bool data_cause_)
      : std::runtime_error("step '" + step_ + "': " + what),
        step(std::move(step_)),
        partial(std::move(partial_)),
        data_cause(data_cause_) {}
  std::string step;
  UnlearnReport partial;
  bool data_cause;  // wrapped a DataError rather than a numerical failure
};

// Closed-form correction (one damped Newton step):
//   theta' = theta - (1/n) H^{-1} sum_j eps_j grad l(z_j; theta).
// With eps = -1 on a single sample this reproduces the removal update of the
// parameter influence exactly. Rejects weight vectors whose snapshot differs
// from m; uses `cached` when its snapshot matches.
ModelParams apply_weighted_newton(const ModelParams& m, const WeightVector& w,
                                  const Dataset& ds, const TrainConfig& cfg,
                                  const HessianFactor* cached = nullptr);

// Full-batch weighted gradient rounds: per round
//   theta <- theta - lr * (1/n) sum_j eps_j grad l(z_j; theta_t),
// i.e. one descent step on the weighted mean risk, gradients re-evaluated at
// the current iterate. eps_f = -1, eps_r = 0 is gradient ascent on the forget
// set; eps_f = 0, eps_r = 1 is fine-tuning on the rest. Aborts when the
// training loss exceeds 10x its initial value.
ModelParams apply_weighted_gradient(const ModelParams& m, const Vector& eps,
                                    const Dataset& ds, const TrainConfig& cfg,
                                    int epochs, double lr);

// Marks the floor(fraction*n) samples with the most negative i_metric (whose
// removal most improves the metric) as the forget set. IfRemoval emits -1 on
// the forget set and 0 elsewhere; GaFt emits -1 / +1 so the engine can run
// its ascent and fine-tune phases.
WeightVector hard_weights(const InfluenceTable& it, HardMode mode,
                          double fraction);

struct FrameworkResult {
  UnlearnReport report;
  ModelParams original_model;
  ModelParams corrected_model;
  WeightVector weights;
  InfluenceTable table;
};

// Algorithm pipeline: train, craft frozen adversarial sets, then
// evaluate -> optimize -> correct with per-step wall clock. The correction is
// gated on the validation metric exceeding delta_threshold. Reported metrics
// are computed on the test split.
FrameworkResult run_framework(const Dataset& ds, const EvalSet& valset,
                              const EvalSet& testset,
                              const UnlearnConfig& ucfg,
                              const TrainConfig& tcfg, MetricKind kind,
                              double gamma = 1.5, double lambda = 1.0,
                              std::optional<double> delta_override = {});

// Convenience overload deriving the evaluation sets from the dataset splits.
FrameworkResult run_framework(const Dataset& ds, const UnlearnConfig& ucfg,
                              const TrainConfig& tcfg, MetricKind kind,
                              double gamma = 1.5, double lambda = 1.0,
                              std::optional<double> delta_override = {});

}  // namespace unlearn
