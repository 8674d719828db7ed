#include "unlearn/metrics.hpp"

#include <cmath>

#include "unlearn/kernels.hpp"

namespace unlearn {

namespace {

Vector margins_of(const RowMatrix& X, const ModelParams& m) {
  if (X.cols() != m.dim())
    throw std::invalid_argument("evaluation set/model dimension mismatch");
  Vector out(X.rows());
  kernels::margins(X.data(), static_cast<std::size_t>(X.rows()),
                   static_cast<std::size_t>(X.cols()), m.theta.data(),
                   m.intercept, out.data());
  return out;
}

inline double eval_loss(double margin, double y) {
  return softplus(margin) - y * margin;
}

void require_nonempty(Index n) {
  if (n == 0) throw DataError("evaluation set is empty");
}

}  // namespace

Sample EvalSet::sample(Index i) const {
  return Sample{Eigen::Map<const Vector>(X.row(i).data(), dim()), y[i], g[i]};
}

Sample AdversarialSet::sample(Index i) const {
  return Sample{Eigen::Map<const Vector>(X.row(i).data(), X.cols()), y[i],
                g[i]};
}

EvalSet EvalSet::from(const Dataset& ds, Split s) {
  std::vector<Index> rows = ds.rows(s);
  if (rows.empty())
    throw DataError(std::string("dataset has no rows in split '") +
                    to_string(s) + "'");
  EvalSet t;
  t.X.resize(static_cast<Index>(rows.size()), ds.dim());
  t.y.resize(static_cast<Index>(rows.size()));
  t.g.resize(static_cast<Index>(rows.size()));
  for (Index k = 0; k < static_cast<Index>(rows.size()); ++k) {
    t.X.row(k) = ds.features.row(rows[k]);
    t.y[k] = ds.labels[rows[k]];
    t.g[k] = ds.sensitive[rows[k]];
  }
  t.origin = s;
  return t;
}

double utility_loss(const EvalSet& t, const ModelParams& m) {
  require_nonempty(t.n());
  Vector margins = margins_of(t.X, m);
  Vector terms(t.n());
  for (Index i = 0; i < t.n(); ++i) terms[i] = eval_loss(margins[i], t.y[i]);
  return kernels::sum(terms.data(), static_cast<std::size_t>(t.n()));
}

double accuracy(const EvalSet& t, const ModelParams& m) {
  require_nonempty(t.n());
  Vector margins = margins_of(t.X, m);
  Index hits = 0;
  for (Index i = 0; i < t.n(); ++i) {
    double pred = margins[i] > 0.0 ? 1.0 : 0.0;
    if (pred == t.y[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(t.n());
}

namespace {

struct GroupMeans {
  double mean0 = 0.0, mean1 = 0.0;
};

// Group means of an arbitrary per-sample value; mask selects participating
// samples.
GroupMeans group_means(const EvalSet& t, const Vector& value,
                       const std::vector<bool>* mask, const char* what) {
  double s0 = 0, s1 = 0;
  Index n0 = 0, n1 = 0;
  for (Index i = 0; i < t.n(); ++i) {
    if (mask && !(*mask)[i]) continue;
    if (t.g[i] == 0.0) {
      s0 += value[i];
      ++n0;
    } else {
      s1 += value[i];
      ++n1;
    }
  }
  if (n0 == 0 || n1 == 0)
    throw DataError(std::string(what) + ": a sensitive group is empty");
  return {s0 / static_cast<double>(n0), s1 / static_cast<double>(n1)};
}

}  // namespace

double demographic_parity(const EvalSet& t, const ModelParams& m) {
  require_nonempty(t.n());
  Vector margins = margins_of(t.X, m);
  Vector prob(t.n());
  for (Index i = 0; i < t.n(); ++i) prob[i] = sigmoid(margins[i]);
  GroupMeans gm = group_means(t, prob, nullptr, "demographic parity");
  return std::abs(gm.mean0 - gm.mean1);
}

double equal_opportunity(const EvalSet& t, const ModelParams& m) {
  require_nonempty(t.n());
  Vector margins = margins_of(t.X, m);
  Vector loss(t.n());
  std::vector<bool> pos(t.n());
  for (Index i = 0; i < t.n(); ++i) {
    loss[i] = eval_loss(margins[i], t.y[i]);
    pos[i] = t.y[i] == 1.0;
  }
  GroupMeans gm = group_means(t, loss, &pos, "equal opportunity (positives)");
  return std::abs(gm.mean1 - gm.mean0);
}

AdversarialSet craft_adversarial(const EvalSet& t, const ModelParams& m,
                                 double gamma) {
  require_nonempty(t.n());
  if (gamma < 1.0)
    throw std::invalid_argument("gamma must be >= 1 (boundary probe at 1)");
  double tt = m.theta.squaredNorm();
  if (tt <= 0.0)
    throw NumericalError("cannot craft adversarial samples from a zero model");
  Vector margins = margins_of(t.X, m);
  AdversarialSet adv;
  adv.X = t.X;
  adv.y = t.y;
  adv.g = t.g;
  adv.gamma = gamma;
  adv.source_model = m;
  for (Index i = 0; i < t.n(); ++i) {
    double scale = gamma * margins[i] / tt;
    adv.X.row(i) -= scale * m.theta.transpose();
  }
  return adv;
}

double robustness_loss(const AdversarialSet& adv, const ModelParams& m) {
  require_nonempty(adv.n());
  Vector margins = margins_of(adv.X, m);
  Vector terms(adv.n());
  for (Index i = 0; i < adv.n(); ++i)
    terms[i] = eval_loss(margins[i], adv.y[i]);
  return kernels::sum(terms.data(), static_cast<std::size_t>(adv.n()));
}

namespace {

// sum over selected rows of the per-sample gradient ((v_i) x_i, v_i), where
// weights[i] carries the chain-rule factor.
Vector weighted_grad_sum(const RowMatrix& X, const Vector& weights) {
  Vector out(X.cols() + 1);
  kernels::weighted_feature_sum(X.data(), static_cast<std::size_t>(X.rows()),
                                static_cast<std::size_t>(X.cols()),
                                weights.data(), out.data());
  out[X.cols()] =
      kernels::sum(weights.data(), static_cast<std::size_t>(weights.size()));
  return out;
}

Vector utility_gradient(const RowMatrix& X, const Vector& y,
                        const ModelParams& m) {
  Vector margins = margins_of(X, m);
  Vector w(X.rows());
  for (Index i = 0; i < X.rows(); ++i) w[i] = sigmoid(margins[i]) - y[i];
  return weighted_grad_sum(X, w);
}

}  // namespace

Vector metric_gradient(FunctionalKind kind, const EvalSet& t,
                       const ModelParams& m) {
  require_nonempty(t.n());
  switch (kind) {
    case FunctionalKind::Utility:
      return utility_gradient(t.X, t.y, m);
    case FunctionalKind::DP: {
      Vector margins = margins_of(t.X, m);
      Vector prob(t.n()), dprob(t.n());
      for (Index i = 0; i < t.n(); ++i) {
        prob[i] = sigmoid(margins[i]);
        dprob[i] = prob[i] * (1.0 - prob[i]);
      }
      GroupMeans gm = group_means(t, prob, nullptr, "demographic parity");
      double diff = gm.mean0 - gm.mean1;
      if (diff == 0.0) return Vector::Zero(m.dim() + 1);
      // d|diff| = sign(diff) * (mean grad over g=0 - mean grad over g=1)
      Index n0 = 0, n1 = 0;
      for (Index i = 0; i < t.n(); ++i) (t.g[i] == 0.0 ? n0 : n1)++;
      double sgn = diff > 0 ? 1.0 : -1.0;
      Vector w(t.n());
      for (Index i = 0; i < t.n(); ++i) {
        double side = t.g[i] == 0.0 ? 1.0 / static_cast<double>(n0)
                                    : -1.0 / static_cast<double>(n1);
        w[i] = sgn * side * dprob[i];
      }
      return weighted_grad_sum(t.X, w);
    }
    case FunctionalKind::EOP: {
      Vector margins = margins_of(t.X, m);
      Vector loss(t.n());
      std::vector<bool> pos(t.n());
      for (Index i = 0; i < t.n(); ++i) {
        loss[i] = eval_loss(margins[i], t.y[i]);
        pos[i] = t.y[i] == 1.0;
      }
      GroupMeans gm =
          group_means(t, loss, &pos, "equal opportunity (positives)");
      double diff = gm.mean1 - gm.mean0;
      if (diff == 0.0) return Vector::Zero(m.dim() + 1);
      Index n0 = 0, n1 = 0;
      for (Index i = 0; i < t.n(); ++i)
        if (pos[i]) (t.g[i] == 0.0 ? n0 : n1)++;
      double sgn = diff > 0 ? 1.0 : -1.0;
      Vector w(t.n());
      for (Index i = 0; i < t.n(); ++i) {
        if (!pos[i]) {
          w[i] = 0.0;
          continue;
        }
        double side = t.g[i] == 1.0 ? 1.0 / static_cast<double>(n1)
                                    : -1.0 / static_cast<double>(n0);
        // d loss / d margin = sigma - y
        w[i] = sgn * side * (sigmoid(margins[i]) - t.y[i]);
      }
      return weighted_grad_sum(t.X, w);
    }
    case FunctionalKind::Robustness:
      throw std::invalid_argument(
          "robustness gradient needs the adversarial overload");
  }
  throw std::invalid_argument("unknown functional kind");
}

Vector metric_gradient(const AdversarialSet& adv, const ModelParams& m) {
  require_nonempty(adv.n());
  return utility_gradient(adv.X, adv.y, m);
}

}  // namespace unlearn
