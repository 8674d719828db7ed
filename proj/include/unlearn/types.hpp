#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace unlearn {

inline constexpr const char* kVersion = "0.1.0";

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Samples are stored one per row, so feature rows must be contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Exit-code buckets for the CLI: usage errors are handled by the parser,
// DataError maps to 2, NumericalError/ConvergenceError to 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : NumericalError {
  ConvergenceError(const std::string& msg, double residual)
      : NumericalError(msg), final_residual(residual) {}
  double final_residual;
};

enum class MetricKind { DP, EOP, Robustness };

const char* to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

// One labelled observation: features x, binary label y, binary sensitive
// attribute g. Views into a dataset row, cheap to copy.
struct Sample {
  Eigen::Map<const Vector> x;
  double y;
  double g;
};

// Linear model theta with separate intercept. The intercept is trained
// jointly with theta and treated as an extra coordinate everywhere
// (gradients, Hessians, influence); only the ridge skips it.
struct ModelParams {
  Vector theta;
  double intercept = 0.0;

  Index dim() const { return theta.size(); }
  // Joint (theta, b) vector, intercept last.
  Vector joint() const;
  static ModelParams from_joint(const Vector& v);
  static ModelParams zeros(Index d);

  bool same_as(const ModelParams& other) const;  // exact, bitwise-equal check
};

struct TrainConfig {
  double l2_reg = 1e-3;    // ridge on theta (intercept excluded)
  double damping = 1e-4;   // added to the full Hessian diagonal
  double grad_tol = 1e-8;  // sup-norm bound on the mean training gradient
  int max_iters = 100;

  void validate() const;
};

}  // namespace unlearn
