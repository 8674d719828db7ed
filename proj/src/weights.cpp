#include "unlearn/weights.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "unlearn/kernels.hpp"

namespace unlearn {

namespace {

double cdot(const Vector& a, const Vector& b) {
  return kernels::dot(a.data(), b.data(), static_cast<std::size_t>(a.size()));
}

struct Products {
  double im2, iu2, imu;
};

Products products_of(const QpInstance& q) {
  return {cdot(q.i_metric, q.i_metric), cdot(q.i_util, q.i_util),
          cdot(q.i_metric, q.i_util)};
}

struct Candidate {
  int id;
  Vector eps;
  double beta1, beta2;
};

struct KktCheck {
  bool feasible;
  double primal_util;    // eps^T i_util            (needs >= 0)
  double primal_metric;  // eps^T i_metric - delta  (needs <= 0)
  double stationarity;   // sup-norm residual
  double slack1, slack2;
};

// Full KKT verification of a candidate at relative tolerance `rel`.
KktCheck kkt_check(const QpInstance& q, const Candidate& c, double rel) {
  KktCheck r{};
  r.primal_util = cdot(c.eps, q.i_util);
  r.primal_metric = cdot(c.eps, q.i_metric) - q.delta;
  double en = c.eps.norm();
  double tol_u = rel * (1.0 + en * q.i_util.norm());
  double tol_m = rel * (1.0 + std::abs(q.delta) + en * q.i_metric.norm());
  Vector st = -q.i_metric + 2.0 * q.lambda * c.eps - c.beta1 * q.i_util +
              c.beta2 * q.i_metric;
  r.stationarity = st.lpNorm<Eigen::Infinity>();
  r.slack1 = std::abs(c.beta1 * r.primal_util);
  r.slack2 = std::abs(c.beta2 * r.primal_metric);
  double tol_s = rel * (1.0 + q.i_metric.lpNorm<Eigen::Infinity>() +
                        2.0 * q.lambda * c.eps.lpNorm<Eigen::Infinity>());
  r.feasible = r.primal_util >= -tol_u && r.primal_metric <= tol_m &&
               c.beta1 >= -tol_u && c.beta2 >= -tol_m &&
               r.stationarity <= tol_s && r.slack1 <= tol_u * (1 + c.beta1) &&
               r.slack2 <= tol_m * (1 + c.beta2);
  return r;
}

WeightVector pack(const Candidate& c) {
  WeightVector w;
  w.eps = c.eps;
  w.case_id = c.id;
  w.dual_beta1 = std::max(0.0, c.beta1);
  w.dual_beta2 = std::max(0.0, c.beta2);
  return w;
}

// Closed-form candidate in scalar form: its duals plus the exact values of
// eps^T i_util and eps^T i_metric, derived from the Gram products. Feasibility
// of all four cases is decided on these scalars; only the winning epsilon
// vector is materialized.
struct ScalarCandidate {
  int id;
  bool exists;
  double beta1, beta2;
  double eps_util;    // eps^T i_util
  double eps_metric;  // eps^T i_metric
};

std::array<ScalarCandidate, 4> scalar_candidates(const QpInstance& q,
                                                 const Products& p) {
  const double two_l = 2.0 * q.lambda;
  std::array<ScalarCandidate, 4> cs;
  cs[0] = {1, true, 0.0, 0.0, p.imu / two_l, p.im2 / two_l};
  cs[1] = {2, p.im2 > 0.0, 0.0,
           p.im2 > 0.0 ? 1.0 - two_l * q.delta / p.im2 : 0.0,
           p.im2 > 0.0 ? q.delta * p.imu / p.im2 : 0.0, q.delta};
  cs[2] = {3, p.iu2 > 0.0, p.iu2 > 0.0 ? -p.imu / p.iu2 : 0.0, 0.0, 0.0,
           p.iu2 > 0.0 ? (p.im2 - p.imu * p.imu / p.iu2) / two_l : 0.0};
  double det = p.im2 * p.iu2 - p.imu * p.imu;
  bool c4 = det > 1e-12 * p.im2 * p.iu2;
  cs[3] = {4, c4, c4 ? -two_l * q.delta * p.imu / det : 0.0,
           c4 ? 1.0 - two_l * q.delta * p.iu2 / det : 0.0, 0.0, q.delta};
  return cs;
}

// Scalar-level KKT feasibility at relative tolerance 1e-12; stationarity and
// complementary slackness hold algebraically for every candidate.
bool scalar_feasible(const QpInstance& q, const Products& p,
                     const ScalarCandidate& c) {
  if (!c.exists) return false;
  double scale_u = 1.0 + std::sqrt(p.im2 * p.iu2) / (2.0 * q.lambda) +
                   std::abs(q.delta);
  double scale_m = 1.0 + p.im2 / (2.0 * q.lambda) + std::abs(q.delta);
  return c.eps_util >= -1e-12 * scale_u &&
         c.eps_metric <= q.delta + 1e-12 * scale_m && c.beta1 >= -1e-12 &&
         c.beta2 >= -1e-12;
}

Vector materialize(const QpInstance& q, const Products& p,
                   const ScalarCandidate& c) {
  switch (c.id) {
    case 1:
      return q.i_metric / (2.0 * q.lambda);
    case 2:
      return (q.delta / p.im2) * q.i_metric;
    case 3:
      return (q.i_metric + c.beta1 * q.i_util) / (2.0 * q.lambda);
    default: {
      // direct form; like case 2 it carries no lambda
      double det = p.im2 * p.iu2 - p.imu * p.imu;
      return (q.delta / det) * (p.iu2 * q.i_metric - p.imu * q.i_util);
    }
  }
}

// Half-space projections used by the numeric oracle.
Vector project_util(const Vector& v, const Vector& a, double a2) {
  if (a2 <= 0.0) return v;
  double viol = cdot(v, a);
  if (viol >= 0.0) return v;
  return v - (viol / a2) * a;
}

Vector project_metric(const Vector& v, const Vector& a, double a2,
                      double delta) {
  if (a2 <= 0.0) return v;
  double viol = cdot(v, a) - delta;
  if (viol <= 0.0) return v;
  return v - (viol / a2) * a;
}

}  // namespace

void QpInstance::validate() const {
  if (!(lambda > 0)) throw DataError("qp lambda must be > 0");
  if (delta < 0) throw DataError("qp delta must be >= 0");
  if (i_metric.size() != i_util.size())
    throw std::invalid_argument("influence vectors differ in length");
  if (i_metric.size() == 0)
    throw std::invalid_argument("empty influence vectors");
}

double qp_objective(const QpInstance& q, const Vector& eps) {
  return -cdot(eps, q.i_metric) + q.lambda * cdot(eps, eps);
}

QpInstance qp_from_table(const InfluenceTable& t, double lambda, double delta) {
  QpInstance q;
  q.i_metric = t.i_metric;
  q.i_util = t.i_util;
  q.lambda = lambda;
  q.delta = delta;
  q.validate();
  return q;
}

WeightVector solve_numeric(const QpInstance& q) {
  q.validate();
  const Index n = q.i_metric.size();
  Products p = products_of(q);
  if (p.im2 == 0.0) {
    WeightVector w;
    w.eps = Vector::Zero(n);
    w.case_id = 1;
    return w;
  }

  // The objective is lambda |eps - z0|^2 + const, so the optimum is the
  // projection of z0 onto the feasible set; Dykstra's alternating
  // projections compute it without any case analysis.
  const Vector z0 = q.i_metric / (2.0 * q.lambda);
  const double scale = 1.0 + z0.lpNorm<Eigen::Infinity>();
  Vector x = z0;
  Vector corr_u = Vector::Zero(n), corr_m = Vector::Zero(n);
  const int cap = 200000;
  bool converged = false;
  for (int it = 0; it < cap; ++it) {
    Vector yv = project_util(x + corr_u, q.i_util, p.iu2);
    corr_u = (x + corr_u) - yv;
    Vector z = project_metric(yv + corr_m, q.i_metric, p.im2, q.delta);
    corr_m = (yv + corr_m) - z;
    double change = (z - x).lpNorm<Eigen::Infinity>();
    x = std::move(z);
    if (change <= 1e-15 * scale) {
      double fu = cdot(x, q.i_util);
      double fm = cdot(x, q.i_metric) - q.delta;
      if (fu >= -1e-12 * scale * (1 + q.i_util.norm()) &&
          fm <= 1e-12 * scale * (1 + q.i_metric.norm())) {
        converged = true;
        break;
      }
    }
  }

  // Recover duals from stationarity on the detected active set:
  // beta1 i_u - beta2 i_m = 2 lambda x - i_m.
  Vector r = 2.0 * q.lambda * x - q.i_metric;
  double act_tol = 1e-9 * (1.0 + std::abs(q.delta) +
                           x.norm() * std::max(q.i_util.norm(),
                                               q.i_metric.norm()));
  bool util_active = p.iu2 > 0.0 && std::abs(cdot(x, q.i_util)) <= act_tol;
  bool metric_active = std::abs(cdot(x, q.i_metric) - q.delta) <= act_tol;
  double b1 = 0.0, b2 = 0.0;
  double det = p.iu2 * p.im2 - p.imu * p.imu;
  if (util_active && metric_active && det > 1e-12 * p.iu2 * p.im2) {
    double ru = cdot(r, q.i_util), rm = cdot(r, q.i_metric);
    // [iu2, -imu; imu, -im2] [b1; b2] = [ru; rm]
    b1 = (-p.im2 * ru + p.imu * rm) / (-det);
    b2 = (-p.imu * ru + p.iu2 * rm) / (-det);
  } else if (metric_active && p.im2 > 0.0) {
    b2 = -cdot(r, q.i_metric) / p.im2;
  } else if (util_active) {
    b1 = cdot(r, q.i_util) / p.iu2;
  }
  b1 = std::max(0.0, b1);
  b2 = std::max(0.0, b2);

  Candidate c{0, x, b1, b2};
  KktCheck chk = kkt_check(q, c, 1e-7);
  if (!converged || !chk.feasible) {
    std::ostringstream os;
    os << "numeric weight solver stalled: best |eps|=" << x.norm()
       << " stationarity=" << chk.stationarity
       << " primal_util=" << chk.primal_util
       << " primal_metric=" << chk.primal_metric << " slack=(" << chk.slack1
       << "," << chk.slack2 << ")";
    throw ConvergenceError(os.str(), chk.stationarity);
  }

  double dual_tol = 1e-10 * (1.0 + std::abs(b1) + std::abs(b2));
  int case_id = 1;
  if (b2 > dual_tol && b1 <= dual_tol) case_id = 2;
  if (b1 > dual_tol && b2 <= dual_tol) case_id = 3;
  if (b1 > dual_tol && b2 > dual_tol) case_id = 4;
  c.id = case_id;
  return pack(c);
}

WeightVector solve_analytic(const QpInstance& q) {
  q.validate();
  Products p = products_of(q);
  if (p.im2 == 0.0) {
    // Vacuous objective: no metric term, penalty alone keeps eps at 0.
    WeightVector w;
    w.eps = Vector::Zero(q.i_metric.size());
    w.case_id = 1;
    return w;
  }
  for (const ScalarCandidate& sc : scalar_candidates(q, p)) {
    if (!scalar_feasible(q, p, sc)) continue;
    Candidate c{sc.id, materialize(q, p, sc), sc.beta1, sc.beta2};
    // One vector-level certificate on the winner guards the scalar algebra
    // against rounding.
    if (kkt_check(q, c, 1e-9).feasible) return pack(c);
  }
  // Either a degenerate Case-4 denominator or rounding pushed every
  // candidate out of tolerance.
  WeightVector w = solve_numeric(q);
  w.note = "analytic candidates failed the KKT check; numeric fallback";
  return w;
}

int classify_case(const QpInstance& q) {
  q.validate();
  Products p = products_of(q);
  if (p.im2 == 0.0) return 1;
  for (const ScalarCandidate& sc : scalar_candidates(q, p)) {
    if (scalar_feasible(q, p, sc)) return sc.id;
  }
  return solve_numeric(q).case_id;
}

}  // namespace unlearn
