#pragma once

#include "unlearn/dataset.hpp"
#include "unlearn/model.hpp"
#include "unlearn/types.hpp"

namespace unlearn {

// Evaluation slice of a dataset. All losses here are plain cross-entropy:
// the ridge belongs to training, not evaluation.
struct EvalSet {
  RowMatrix X;  // n x d
  Vector y;
  Vector g;
  Split origin = Split::Validation;

  Index n() const { return X.rows(); }
  Index dim() const { return X.cols(); }
  Sample sample(Index i) const;

  static EvalSet from(const Dataset& ds, Split s);
};

// Features pushed orthogonally across the source model's hyperplane:
// xt = x - gamma * (theta^T x + b) / (theta^T theta) * theta, so the margin
// obeys theta^T xt + b = (1 - gamma)(theta^T x + b). Labels and sensitive
// attributes are kept. Crafted once and frozen; evaluating under other models
// is the point.
struct AdversarialSet {
  RowMatrix X;
  Vector y;
  Vector g;
  double gamma = 1.5;
  ModelParams source_model;

  Index n() const { return X.rows(); }
  Sample sample(Index i) const;
};

enum class FunctionalKind { Utility, DP, EOP, Robustness };

// Sum of per-sample cross-entropy losses over the set.
double utility_loss(const EvalSet& t, const ModelParams& m);

// |E[sigma | g=0] - E[sigma | g=1]| over predicted probabilities; needs both
// groups present.
double demographic_parity(const EvalSet& t, const ModelParams& m);

// |E[loss | g=1, y=1] - E[loss | g=0, y=1]|; needs a positive sample in each
// group.
double equal_opportunity(const EvalSet& t, const ModelParams& m);

// gamma == 1 projects exactly onto the hyperplane (a boundary probe used by
// tests); anything below 1 is rejected. Callers that want an actual attack
// should pass gamma > 1.
AdversarialSet craft_adversarial(const EvalSet& t, const ModelParams& m,
                                 double gamma);

double robustness_loss(const AdversarialSet& adv, const ModelParams& m);

// 0/1 accuracy at probability threshold 0.5.
double accuracy(const EvalSet& t, const ModelParams& m);

// Exact gradient of the requested functional with respect to (theta, b).
// For DP/EOP the absolute value contributes sign(group difference); exactly
// at zero difference the subgradient 0 is returned. Robustness uses the
// adversarial overload.
Vector metric_gradient(FunctionalKind kind, const EvalSet& t,
                       const ModelParams& m);
Vector metric_gradient(const AdversarialSet& adv, const ModelParams& m);

}  // namespace unlearn
