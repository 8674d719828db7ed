#include "unlearn/model.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

#include "unlearn/kernels.hpp"

namespace unlearn {

const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::DP:
      return "dp";
    case MetricKind::EOP:
      return "eop";
    case MetricKind::Robustness:
      return "robustness";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "dp") return MetricKind::DP;
  if (s == "eop") return MetricKind::EOP;
  if (s == "robustness") return MetricKind::Robustness;
  throw DataError("unknown metric kind: '" + s + "'");
}

Vector ModelParams::joint() const {
  Vector v(theta.size() + 1);
  v.head(theta.size()) = theta;
  v[theta.size()] = intercept;
  return v;
}

ModelParams ModelParams::from_joint(const Vector& v) {
  ModelParams m;
  m.theta = v.head(v.size() - 1);
  m.intercept = v[v.size() - 1];
  return m;
}

ModelParams ModelParams::zeros(Index d) {
  ModelParams m;
  m.theta = Vector::Zero(d);
  m.intercept = 0.0;
  return m;
}

bool ModelParams::same_as(const ModelParams& other) const {
  if (theta.size() != other.theta.size()) return false;
  if (intercept != other.intercept) return false;
  for (Index i = 0; i < theta.size(); ++i)
    if (theta[i] != other.theta[i]) return false;
  return true;
}

void TrainConfig::validate() const {
  if (l2_reg < 0) throw DataError("l2_reg must be >= 0");
  if (damping < 0) throw DataError("damping must be >= 0");
  if (!(grad_tol > 0)) throw DataError("grad_tol must be > 0");
  if (max_iters < 1) throw DataError("max_iters must be >= 1");
}

double sigmoid(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  double e = std::exp(m);
  return e / (1.0 + e);
}

double softplus(double m) {
  // max(m, 0) + log1p(exp(-|m|)) never overflows.
  return std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m)));
}

namespace {

inline double bce(double margin, double y) {
  return softplus(margin) - y * margin;
}

void check_dim(const Sample& z, const ModelParams& m) {
  if (z.x.size() != m.theta.size())
    throw std::invalid_argument("sample/model dimension mismatch");
}

}  // namespace

double sample_loss(const Sample& z, const ModelParams& m, double l2_reg) {
  check_dim(z, m);
  double margin = m.theta.dot(z.x) + m.intercept;
  return bce(margin, z.y) + 0.5 * l2_reg * m.theta.squaredNorm();
}

Vector sample_gradient(const Sample& z, const ModelParams& m, double l2_reg) {
  check_dim(z, m);
  double margin = m.theta.dot(z.x) + m.intercept;
  double r = sigmoid(margin) - z.y;
  Vector g(m.dim() + 1);
  g.head(m.dim()) = r * z.x + l2_reg * m.theta;
  g[m.dim()] = r;
  return g;
}

TrainView TrainView::from(const Dataset& ds) {
  std::vector<Index> rows = ds.rows(Split::Train);
  if (rows.empty()) throw DataError("dataset has no training rows");
  TrainView v;
  v.Xe.resize(static_cast<Index>(rows.size()), ds.dim() + 1);
  v.y.resize(static_cast<Index>(rows.size()));
  for (Index k = 0; k < static_cast<Index>(rows.size()); ++k) {
    v.Xe.block(k, 0, 1, ds.dim()) = ds.features.row(rows[k]);
    v.Xe(k, ds.dim()) = 1.0;
    v.y[k] = ds.labels[rows[k]];
  }
  return v;
}

TrainView TrainView::without(const Dataset& ds, Index drop) {
  TrainView full = from(ds);
  if (drop < 0 || drop >= full.n())
    throw DataError("leave-one-out index out of range: " +
                    std::to_string(drop));
  TrainView v;
  v.Xe.resize(full.n() - 1, full.Xe.cols());
  v.y.resize(full.n() - 1);
  Index k = 0;
  for (Index i = 0; i < full.n(); ++i) {
    if (i == drop) continue;
    v.Xe.row(k) = full.Xe.row(i);
    v.y[k] = full.y[i];
    ++k;
  }
  return v;
}

namespace {

void check_view(const TrainView& v, const ModelParams& m) {
  if (v.dim() != m.dim())
    throw std::invalid_argument("view/model dimension mismatch");
  if (v.n() == 0) throw DataError("empty training view");
}

Vector compute_margins(const TrainView& v, const ModelParams& m) {
  Vector jm = m.joint();
  Vector out(v.n());
  kernels::margins(v.Xe.data(), static_cast<std::size_t>(v.n()),
                   static_cast<std::size_t>(v.Xe.cols()), jm.data(), 0.0,
                   out.data());
  return out;
}

}  // namespace

double mean_loss(const TrainView& v, const ModelParams& m, double l2_reg,
                 const Vector* w) {
  check_view(v, m);
  Vector margins = compute_margins(v, m);
  Vector terms(v.n());
  double wsum = 0.0;
  for (Index i = 0; i < v.n(); ++i) {
    double wi = w ? (*w)[i] : 1.0;
    terms[i] = wi * bce(margins[i], v.y[i]);
    wsum += wi;
  }
  double n = static_cast<double>(v.n());
  double base = kernels::sum(terms.data(), static_cast<std::size_t>(v.n())) / n;
  return base + 0.5 * l2_reg * m.theta.squaredNorm() * (wsum / n);
}

Vector mean_gradient(const TrainView& v, const ModelParams& m, double l2_reg,
                     const Vector* w) {
  check_view(v, m);
  Vector margins = compute_margins(v, m);
  const double n = static_cast<double>(v.n());
  Vector r(v.n());
  double wsum = 0.0;
  for (Index i = 0; i < v.n(); ++i) {
    double wi = w ? (*w)[i] : 1.0;
    r[i] = wi * (sigmoid(margins[i]) - v.y[i]) / n;
    wsum += wi;
  }
  Vector g(v.dim() + 1);
  kernels::weighted_feature_sum(v.Xe.data(), static_cast<std::size_t>(v.n()),
                                static_cast<std::size_t>(v.Xe.cols()), r.data(),
                                g.data());
  g.head(v.dim()) += l2_reg * (wsum / n) * m.theta;
  return g;
}

Matrix hessian(const TrainView& v, const ModelParams& m, const TrainConfig& cfg,
               const Vector* w) {
  check_view(v, m);
  cfg.validate();
  Vector margins = compute_margins(v, m);
  const double n = static_cast<double>(v.n());
  Vector coef(v.n());
  double wsum = 0.0;
  for (Index i = 0; i < v.n(); ++i) {
    double wi = w ? (*w)[i] : 1.0;
    double s = sigmoid(margins[i]);
    coef[i] = wi * s * (1.0 - s) / n;
    wsum += wi;
  }
  const Index de = v.Xe.cols();
  RowMatrix hraw(de, de);
  kernels::weighted_outer_accumulate(
      v.Xe.data(), static_cast<std::size_t>(v.n()),
      static_cast<std::size_t>(de), coef.data(), hraw.data());
  Matrix h = hraw;
  h = 0.5 * (h + h.transpose()).eval();
  for (Index j = 0; j < de - 1; ++j) h(j, j) += cfg.l2_reg * (wsum / n);
  for (Index j = 0; j < de; ++j) h(j, j) += cfg.damping;
  return h;
}

Matrix hessian(const Dataset& ds, const ModelParams& m, const TrainConfig& cfg) {
  return hessian(TrainView::from(ds), m, cfg);
}

Vector mean_gradient(const Dataset& ds, const ModelParams& m, double l2_reg) {
  return mean_gradient(TrainView::from(ds), m, l2_reg);
}

RowMatrix per_sample_gradients(const TrainView& v, const ModelParams& m,
                               double l2_reg) {
  check_view(v, m);
  Vector margins = compute_margins(v, m);
  RowMatrix g(v.n(), v.Xe.cols());
  for (Index i = 0; i < v.n(); ++i) {
    double r = sigmoid(margins[i]) - v.y[i];
    g.row(i) = r * v.Xe.row(i);
    g.block(i, 0, 1, v.dim()) += l2_reg * m.theta.transpose();
  }
  return g;
}

namespace {

double smallest_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Vector checked_solve(const Eigen::LLT<Matrix>& llt, const Matrix& h,
                     const Vector& v) {
  Vector u = llt.solve(v);
  const double bound = 1e-8 * (1.0 + v.lpNorm<Eigen::Infinity>());
  double res = (h * u - v).lpNorm<Eigen::Infinity>();
  if (res > bound) {
    u += llt.solve(v - h * u);  // one refinement pass
    res = (h * u - v).lpNorm<Eigen::Infinity>();
    if (res > bound) {
      std::ostringstream os;
      os << "hessian solve residual " << res << " exceeds bound " << bound;
      throw NumericalError(os.str());
    }
  }
  assert((h * u - v).lpNorm<Eigen::Infinity>() <= bound);
  return u;
}

Eigen::LLT<Matrix> factorize_pd(const Matrix& h) {
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "matrix not positive definite after damping; smallest eigenvalue "
       << smallest_eigenvalue(h);
    throw NumericalError(os.str());
  }
  return llt;
}

}  // namespace

Vector solve_hinv(const Matrix& h, const Vector& v) {
  if (h.rows() != h.cols() || h.rows() != v.size())
    throw std::invalid_argument("solve_hinv dimension mismatch");
  Eigen::LLT<Matrix> llt = factorize_pd(h);
  return checked_solve(llt, h, v);
}

HessianFactor::HessianFactor(Matrix h, ModelParams snapshot)
    : llt_(factorize_pd(h)), h_(std::move(h)), snap_(std::move(snapshot)) {}

Vector HessianFactor::solve(const Vector& v) const {
  return checked_solve(llt_, h_, v);
}

std::shared_ptr<const HessianFactor> factor_hessian(const Dataset& ds,
                                                    const ModelParams& m,
                                                    const TrainConfig& cfg) {
  return std::make_shared<const HessianFactor>(hessian(ds, m, cfg), m);
}

namespace {

// One damped-Newton step with Armijo backtracking. Returns the accepted
// parameters; near the rounding floor the full step is kept whenever it
// reduces the gradient norm.
ModelParams newton_step(const TrainView& v, const TrainConfig& cfg,
                        const ModelParams& m, const Vector& g,
                        const Vector* w, bool* accepted) {
  Matrix h = hessian(v, m, cfg, w);
  Eigen::LLT<Matrix> llt(h);
  double extra = cfg.damping > 0 ? cfg.damping : 1e-8;
  while (llt.info() != Eigen::Success) {
    // Best-effort path for indefinite weighted problems.
    for (Index j = 0; j < h.rows(); ++j) h(j, j) += extra;
    extra *= 10.0;
    if (extra > 1e6) throw NumericalError("cannot stabilize Newton system");
    llt.compute(h);
  }
  Vector step = llt.solve(g);
  Vector jm = m.joint();
  const double gn_old = g.lpNorm<Eigen::Infinity>();

  // In the quadratic regime the full step at least halves the gradient;
  // take it before consulting the loss, whose decrements fall below rounding
  // near the minimizer.
  ModelParams full = ModelParams::from_joint(jm - step);
  double gn_full =
      mean_gradient(v, full, cfg.l2_reg, w).lpNorm<Eigen::Infinity>();
  if (gn_full <= 0.5 * gn_old) {
    *accepted = true;
    return full;
  }

  double slope = g.dot(step);  // > 0 for a descent direction of -step
  double loss0 = mean_loss(v, m, cfg.l2_reg, w);
  double t = 1.0;
  while (t >= 1e-10) {
    ModelParams cand = ModelParams::from_joint(jm - t * step);
    double lc = mean_loss(v, cand, cfg.l2_reg, w);
    if (lc <= loss0 - 1e-4 * t * slope) {
      *accepted = true;
      return cand;
    }
    t *= 0.5;
  }
  // Loss differences are below rounding; keep the full step if it shrinks
  // the gradient at all.
  *accepted = gn_full < gn_old;
  return *accepted ? full : m;
}

}  // namespace

ModelParams train_view(const TrainView& v, const TrainConfig& cfg,
                       const ModelParams& init, const Vector* w) {
  cfg.validate();
  check_view(v, init);
  if (w && w->size() != v.n())
    throw std::invalid_argument("weight vector length mismatch");
  ModelParams m = init;
  double gn = 0.0;
  bool converged = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    Vector g = mean_gradient(v, m, cfg.l2_reg, w);
    gn = g.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(gn)) throw NumericalError("gradient diverged");
    if (gn <= cfg.grad_tol) {
      converged = true;
      break;
    }
    bool accepted = false;
    m = newton_step(v, cfg, m, g, w, &accepted);
    if (!accepted) break;  // rounding floor reached
  }
  if (!converged) {
    gn = mean_gradient(v, m, cfg.l2_reg, w).lpNorm<Eigen::Infinity>();
    if (gn > cfg.grad_tol)
      throw ConvergenceError(
          "training did not converge; final gradient norm " +
              std::to_string(gn),
          gn);
  }
  // Polish toward the rounding floor so independently started runs coincide.
  for (int extra = 0; extra < 3; ++extra) {
    Vector g = mean_gradient(v, m, cfg.l2_reg, w);
    if (g.lpNorm<Eigen::Infinity>() <= 1e-13) break;
    bool accepted = false;
    ModelParams next = newton_step(v, cfg, m, g, w, &accepted);
    if (!accepted) break;
    m = next;
  }
  return m;
}

ModelParams train(const Dataset& ds, const TrainConfig& cfg,
                  const ModelParams& init) {
  return train_view(TrainView::from(ds), cfg, init);
}

}  // namespace unlearn
