#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "testutil.hpp"
#include "unlearn/influence.hpp"
#include "unlearn/oracle.hpp"

using namespace unlearn;

namespace {

Dataset trained_problem(Index n, Index d, uint64_t seed) {
  return gen_synthetic(SyntheticKind::BiasedGauss, n, d, 1.0, seed);
}

}  // namespace

TEST_CASE("weighted influence identities") {
  CHECK(weighted_influence(0.0, 3.7) == 0.0);
  CHECK(weighted_influence(-1.0, 3.7) == 3.7);
  CHECK(weighted_influence(0.5, 2.0) == -1.0);
  // linearity in the weight
  auto rng = testutil::make_rng(2);
  for (int i = 0; i < 50; ++i) {
    double a = rng.normal(), eps = rng.normal(), I = rng.normal();
    CHECK(weighted_influence(a * eps, I) ==
          doctest::Approx(a * weighted_influence(eps, I)).epsilon(1e-12));
  }
}

TEST_CASE("influence requires a trained minimizer") {
  Dataset ds = trained_problem(90, 3, 4);
  TrainConfig cfg;
  CHECK_THROWS_AS(influence_param(0, ds, ModelParams::zeros(3), cfg),
                  NumericalError);
}

TEST_CASE("near-zero sample gradient means near-zero parameter influence") {
  Dataset ds = trained_problem(90, 3, 5);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(3));
  TrainView v = TrainView::from(ds);
  // pick the training sample with the smallest gradient under m
  Index best = 0;
  double best_norm = 1e300;
  for (Index j = 0; j < v.n(); ++j) {
    Sample z{Eigen::Map<const Vector>(v.Xe.row(j).data(), v.dim()), v.y[j], 0.};
    double gn = sample_gradient(z, m, cfg.l2_reg).norm();
    if (gn < best_norm) {
      best_norm = gn;
      best = j;
    }
  }
  Vector infl = influence_param(best, ds, m, cfg);
  CHECK(infl.norm() <= 10.0 * best_norm);  // scales with the tiny gradient
}

TEST_CASE("duplicating the dataset halves the parameter influence") {
  Dataset ds = trained_problem(60, 2, 6);
  Dataset dup = ds;
  const Index n = ds.n();
  dup.features.conservativeResize(2 * n, Eigen::NoChange);
  dup.labels.conservativeResize(2 * n);
  dup.sensitive.conservativeResize(2 * n);
  dup.split.resize(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    dup.features.row(n + i) = ds.features.row(i);
    dup.labels[n + i] = ds.labels[i];
    dup.sensitive[n + i] = ds.sensitive[i];
    dup.split[static_cast<std::size_t>(n + i)] =
        ds.split[static_cast<std::size_t>(i)];
  }
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(2));
  // the duplicated problem has the same minimizer
  Vector a = influence_param(0, ds, m, cfg);
  Vector b = influence_param(0, dup, m, cfg);
  CHECK((2.0 * b - a).lpNorm<Eigen::Infinity>() <= 1e-9 * (1 + a.norm()));
}

TEST_CASE("parameter influence tracks actual leave-one-out deltas") {
  Dataset ds = trained_problem(30, 2, 7);  // 20 training rows
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(2));
  TrainView v = TrainView::from(ds);
  for (Index j = 0; j < std::min<Index>(v.n(), 8); ++j) {
    Vector est = influence_param(j, ds, m, cfg);
    ModelParams mj = loo_retrain(ds, j, cfg, m);
    Vector actual = mj.joint() - m.joint();
    if (actual.norm() < 1e-12) continue;
    double cosine = est.dot(actual) / (est.norm() * actual.norm());
    CHECK(cosine >= 0.99);
  }
}

TEST_CASE("one left solve equals per-sample right solves") {
  Dataset ds = trained_problem(120, 3, 8);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(3));
  TrainView v = TrainView::from(ds);
  RowMatrix grads = per_sample_gradients(v, m, cfg.l2_reg);
  HessianFactor factor(hessian(v, m, cfg), m);
  auto rng = testutil::make_rng(9);
  Vector vec = testutil::random_vector(rng, 4, 2.0);
  Vector left = influence_against(vec, grads, factor);
  for (Index j = 0; j < v.n(); j += 7) {
    Vector right = factor.solve(grads.row(j).transpose());
    CHECK(std::abs(left[j] - vec.dot(right)) <= 1e-8 * (1 + std::abs(left[j])));
  }
}

TEST_CASE("negating the functional gradient negates the scores exactly") {
  Dataset ds = trained_problem(80, 2, 10);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(2));
  TrainView v = TrainView::from(ds);
  RowMatrix grads = per_sample_gradients(v, m, cfg.l2_reg);
  HessianFactor factor(hessian(v, m, cfg), m);
  auto rng = testutil::make_rng(11);
  Vector vec = testutil::random_vector(rng, 3);
  Vector plus = influence_against(vec, grads, factor);
  Vector minus = influence_against(Vector(-vec), grads, factor);
  for (Index j = 0; j < plus.size(); ++j) CHECK(minus[j] == -plus[j]);
}

TEST_CASE("zero functional gradient gives the all-zero table") {
  Dataset ds = trained_problem(80, 2, 12);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(2));
  TrainView v = TrainView::from(ds);
  RowMatrix grads = per_sample_gradients(v, m, cfg.l2_reg);
  HessianFactor factor(hessian(v, m, cfg), m);
  CHECK(influence_against(Vector::Zero(3), grads, factor).norm() == 0.0);
}

TEST_CASE("influence tables are bit-reproducible") {
  Dataset ds = trained_problem(150, 3, 13);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(3));
  EvalSet val = EvalSet::from(ds, Split::Validation);
  AdversarialSet adv = craft_adversarial(val, m, 1.5);
  InfluenceTable a = influence_scores(ds, val, &adv, m, cfg, MetricKind::DP);
  InfluenceTable b = influence_scores(ds, val, &adv, m, cfg, MetricKind::DP);
  CHECK(a.i_util == b.i_util);
  CHECK(a.i_metric == b.i_metric);
  CHECK(a.model_snapshot.same_as(m));
}

TEST_CASE("robustness influence needs an adversarial set") {
  Dataset ds = trained_problem(90, 2, 14);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(2));
  EvalSet val = EvalSet::from(ds, Split::Validation);
  CHECK_THROWS_AS(
      influence_scores(ds, val, nullptr, m, cfg, MetricKind::Robustness),
      std::invalid_argument);
  // EOP goes through the same pipeline
  InfluenceTable t =
      influence_scores(ds, val, nullptr, m, cfg, MetricKind::EOP);
  CHECK(t.metric_kind == MetricKind::EOP);
  CHECK(t.n() == ds.count(Split::Train));
}
