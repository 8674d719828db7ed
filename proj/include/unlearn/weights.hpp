#pragma once

#include <optional>
#include <string>

#include "unlearn/influence.hpp"
#include "unlearn/types.hpp"

namespace unlearn {

// Weight-discovery program over per-sample weights eps:
//
//   minimize   -eps^T i_metric + lambda |eps|^2
//   subject to  eps^T i_util   >= 0        (utility not compromised)
//               eps^T i_metric <= delta    (no over-correction)
//
// lambda > 0 makes the objective strictly convex; delta >= 0 keeps the
// origin feasible. The objective equals lambda |eps - i_metric/(2 lambda)|^2
// up to a constant, so the optimum is the Euclidean projection of
// i_metric/(2 lambda) onto the two half-spaces.
struct QpInstance {
  Vector i_metric;
  Vector i_util;
  double lambda = 1.0;
  double delta = 0.0;

  void validate() const;
};

// Solution plus its KKT certificate. case_id names the active-set case:
//   1: no constraint active            eps = i_m / (2 lambda)
//   2: metric bound active             eps = delta i_m / |i_m|^2
//   3: utility constraint active       eps = (i_m - (i_m.i_u/|i_u|^2) i_u) / (2 lambda)
//   4: both active                     eps = delta (|i_u|^2 i_m - (i_m.i_u) i_u) / D,
//                                      D = |i_m|^2 |i_u|^2 - (i_m.i_u)^2
// Hard-weight vectors produced outside the QP carry case_id = 0.
struct WeightVector {
  Vector eps;
  int case_id = 1;
  double dual_beta1 = 0.0;  // multiplier of eps^T i_util >= 0
  double dual_beta2 = 0.0;  // multiplier of eps^T i_metric <= delta
  std::optional<ModelParams> snapshot;  // set when derived from a table
  std::string note;  // nonempty when a fallback produced the result
};

// Evaluates all four closed-form candidates, returns the first (lowest case
// id) that passes the full KKT check. Degenerate instances (parallel
// vectors, no candidate feasible at tolerance) fall back to solve_numeric.
// i_metric == 0 short-circuits to zero weights with case 1.
WeightVector solve_analytic(const QpInstance& q);

// Independent numeric oracle: Dykstra alternating projections of
// i_metric/(2 lambda) onto the two half-spaces, with duals recovered from
// stationarity on the detected active set. Shares no algebra with the
// closed-form cases.
WeightVector solve_numeric(const QpInstance& q);

// Case label of the KKT-feasible analytic candidate; lowest id on boundary
// ties. Falls back to the numeric solution's active set.
int classify_case(const QpInstance& q);

double qp_objective(const QpInstance& q, const Vector& eps);

QpInstance qp_from_table(const InfluenceTable& t, double lambda, double delta);

}  // namespace unlearn
