#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "testutil.hpp"
#include "unlearn/metrics.hpp"

using namespace unlearn;

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Mirrored pairs: identical features and labels, opposite groups.
EvalSet mirrored_set(Index pairs, Index d, uint64_t seed) {
  auto rng = testutil::make_rng(seed);
  EvalSet t;
  t.X.resize(2 * pairs, d);
  t.y.resize(2 * pairs);
  t.g.resize(2 * pairs);
  for (Index p = 0; p < pairs; ++p) {
    for (Index j = 0; j < d; ++j) {
      double v = rng.normal();
      t.X(2 * p, j) = v;
      t.X(2 * p + 1, j) = v;
    }
    double y = p % 2 == 0 ? 1.0 : 0.0;
    t.y[2 * p] = y;
    t.y[2 * p + 1] = y;
    t.g[2 * p] = 0.0;
    t.g[2 * p + 1] = 1.0;
  }
  return t;
}

}  // namespace

TEST_CASE("utility loss of the zero model is n ln 2") {
  auto rng = testutil::make_rng(3);
  EvalSet t = testutil::random_eval_set(rng, 10, 2);
  CHECK(utility_loss(t, ModelParams::zeros(2)) == doctest::Approx(10 * kLn2));
}

TEST_CASE("perfectly classified saturated set has vanishing loss") {
  EvalSet t;
  t.X.resize(4, 1);
  t.y.resize(4);
  t.g.resize(4);
  for (Index i = 0; i < 4; ++i) {
    t.X(i, 0) = i < 2 ? 50.0 : -50.0;
    t.y[i] = i < 2 ? 1.0 : 0.0;
    t.g[i] = i % 2 ? 1.0 : 0.0;
  }
  ModelParams m;
  m.theta = Vector::Ones(1);
  CHECK(utility_loss(t, m) <= 1e-18);
}

TEST_CASE("utility loss equals the naive per-sample loop") {
  auto rng = testutil::make_rng(11);
  EvalSet t = testutil::random_eval_set(rng, 23, 3);
  ModelParams m = testutil::random_model(rng, 3);
  double naive = 0.0;
  for (Index i = 0; i < t.n(); ++i) naive += sample_loss(t.sample(i), m, 0.0);
  CHECK(utility_loss(t, m) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("demographic parity vanishes by symmetry and at the zero model") {
  EvalSet t = mirrored_set(8, 3, 5);
  auto rng = testutil::make_rng(6);
  CHECK(demographic_parity(t, testutil::random_model(rng, 3)) == 0.0);
  EvalSet r = testutil::random_eval_set(rng, 12, 3);
  CHECK(demographic_parity(r, ModelParams::zeros(3)) == 0.0);
}

TEST_CASE("demographic parity matches hand-computed group means") {
  EvalSet t;
  t.X.resize(4, 1);
  t.y.resize(4);
  t.g.resize(4);
  t.X << 1.0, -1.0, 2.0, 0.0;
  t.y << 1.0, 0.0, 1.0, 0.0;
  t.g << 0.0, 0.0, 1.0, 1.0;
  ModelParams m;
  m.theta = Vector::Ones(1);
  m.intercept = 0.5;
  double m0 = (sigmoid(1.5) + sigmoid(-0.5)) / 2.0;
  double m1 = (sigmoid(2.5) + sigmoid(0.5)) / 2.0;
  CHECK(demographic_parity(t, m) == doctest::Approx(std::abs(m0 - m1)));
  CHECK(demographic_parity(t, m) >= 0.0);
  CHECK(demographic_parity(t, m) <= 1.0);
}

TEST_CASE("demographic parity requires both groups") {
  auto rng = testutil::make_rng(9);
  EvalSet t = testutil::random_eval_set(rng, 8, 2);
  t.g.setZero();
  CHECK_THROWS_AS(demographic_parity(t, ModelParams::zeros(2)), DataError);
}

TEST_CASE("equal opportunity zero cases and hand check") {
  EvalSet t = mirrored_set(6, 2, 8);
  auto rng = testutil::make_rng(10);
  CHECK(equal_opportunity(t, testutil::random_model(rng, 2)) == 0.0);
  EvalSet r = testutil::random_eval_set(rng, 10, 2);
  CHECK(equal_opportunity(r, ModelParams::zeros(2)) == 0.0);

  EvalSet h;
  h.X.resize(4, 1);
  h.y.resize(4);
  h.g.resize(4);
  h.X << 1.0, 3.0, -1.0, 0.5;
  h.y << 1.0, 1.0, 0.0, 1.0;
  h.g << 0.0, 1.0, 0.0, 1.0;
  ModelParams m;
  m.theta = Vector::Ones(1);
  double e0 = softplus(1.0) - 1.0;                       // loss of (x=1, y=1)
  double e1 = ((softplus(3.0) - 3.0) + (softplus(0.5) - 0.5)) / 2.0;
  CHECK(equal_opportunity(h, m) == doctest::Approx(std::abs(e1 - e0)));
}

TEST_CASE("equal opportunity requires a positive sample per group") {
  auto rng = testutil::make_rng(12);
  EvalSet t = testutil::random_eval_set(rng, 8, 2);
  for (Index i = 0; i < t.n(); ++i)
    if (t.g[i] == 1.0) t.y[i] = 0.0;
  CHECK_THROWS_AS(equal_opportunity(t, ModelParams::zeros(2)), DataError);
}

TEST_CASE("boundary probe at gamma=1 lands every sample on the hyperplane") {
  auto rng = testutil::make_rng(14);
  EvalSet t = testutil::random_eval_set(rng, 9, 3);
  ModelParams m = testutil::random_model(rng, 3);
  AdversarialSet adv = craft_adversarial(t, m, 1.0);
  for (Index i = 0; i < adv.n(); ++i)
    CHECK(std::abs(adv.X.row(i).dot(m.theta) + m.intercept) <= 1e-12);
}

TEST_CASE("gamma=2 negates the margin exactly") {
  auto rng = testutil::make_rng(15);
  EvalSet t = testutil::random_eval_set(rng, 7, 2);
  ModelParams m = testutil::random_model(rng, 2);
  AdversarialSet adv = craft_adversarial(t, m, 2.0);
  for (Index i = 0; i < adv.n(); ++i) {
    double before = t.X.row(i).dot(m.theta) + m.intercept;
    double after = adv.X.row(i).dot(m.theta) + m.intercept;
    CHECK(after == doctest::Approx(-before).epsilon(1e-12));
  }
}

TEST_CASE("closed-form crafting example") {
  EvalSet t;
  t.X.resize(1, 2);
  t.y.resize(1);
  t.g.resize(1);
  t.X << 2.0, 0.0;
  t.y << 1.0;
  t.g << 0.0;
  ModelParams m;
  m.theta = Vector::Zero(2);
  m.theta[0] = 1.0;
  AdversarialSet adv = craft_adversarial(t, m, 1.5);
  CHECK(adv.X(0, 0) == doctest::Approx(-1.0));
  CHECK(adv.X(0, 1) == doctest::Approx(0.0));
  // margin identity cross-check
  CHECK(adv.X.row(0).dot(m.theta) ==
        doctest::Approx((1.0 - 1.5) * 2.0).epsilon(1e-15));
}

TEST_CASE("margin identity and perturbation direction hold on random sets") {
  auto rng = testutil::make_rng(16);
  for (int rep = 0; rep < 10; ++rep) {
    Index d = 2 + static_cast<Index>(rng.below(3));
    EvalSet t = testutil::random_eval_set(rng, 11, d);
    ModelParams m = testutil::random_model(rng, d);
    double gamma = 1.0 + rng.uniform() * 2.0;
    RowMatrix before = t.X;
    AdversarialSet adv = craft_adversarial(t, m, gamma);
    CHECK(t.X == before);  // input untouched
    for (Index i = 0; i < adv.n(); ++i) {
      double m0 = t.X.row(i).dot(m.theta) + m.intercept;
      double m1 = adv.X.row(i).dot(m.theta) + m.intercept;
      CHECK(std::abs(m1 - (1.0 - gamma) * m0) <= 1e-9);
      Vector diff = (adv.X.row(i) - t.X.row(i)).transpose();
      if (diff.norm() > 1e-12) {
        double cosine = std::abs(diff.dot(m.theta)) /
                        (diff.norm() * m.theta.norm());
        CHECK(cosine >= 1.0 - 1e-9);
      }
    }
  }
}

TEST_CASE("crafting rejects a zero model and gamma below one") {
  auto rng = testutil::make_rng(17);
  EvalSet t = testutil::random_eval_set(rng, 5, 2);
  CHECK_THROWS_AS(craft_adversarial(t, ModelParams::zeros(2), 1.5),
                  NumericalError);
  ModelParams m = testutil::random_model(rng, 2);
  CHECK_THROWS_AS(craft_adversarial(t, m, 0.9), std::invalid_argument);
}

TEST_CASE("robustness loss near the boundary probe approaches n ln 2") {
  auto rng = testutil::make_rng(18);
  EvalSet t = testutil::random_eval_set(rng, 8, 2);
  ModelParams m = testutil::random_model(rng, 2);
  AdversarialSet adv = craft_adversarial(t, m, 1.0 + 1e-12);
  CHECK(robustness_loss(adv, m) ==
        doctest::Approx(8 * kLn2).epsilon(1e-8));
}

TEST_CASE("gamma=2 attack strictly exceeds the clean loss when correct") {
  // A correctly classified set: reflected margins flip every prediction.
  EvalSet t;
  t.X.resize(6, 1);
  t.y.resize(6);
  t.g.resize(6);
  for (Index i = 0; i < 6; ++i) {
    t.X(i, 0) = i < 3 ? 1.0 + 0.3 * i : -1.0 - 0.3 * i;
    t.y[i] = i < 3 ? 1.0 : 0.0;
    t.g[i] = i % 2 ? 1.0 : 0.0;
  }
  ModelParams m;
  m.theta = Vector::Ones(1);
  AdversarialSet adv = craft_adversarial(t, m, 2.0);
  CHECK(robustness_loss(adv, m) > utility_loss(t, m));
}

TEST_CASE("robustness loss equals brute-force summation") {
  auto rng = testutil::make_rng(19);
  EvalSet t = testutil::random_eval_set(rng, 13, 3);
  ModelParams m = testutil::random_model(rng, 3);
  AdversarialSet adv = craft_adversarial(t, m, 1.7);
  double naive = 0;
  for (Index i = 0; i < adv.n(); ++i)
    naive += sample_loss(adv.sample(i), m, 0.0);
  CHECK(robustness_loss(adv, m) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("utility gradient of one sample equals the ridge-free model gradient") {
  auto rng = testutil::make_rng(20);
  EvalSet t = testutil::random_eval_set(rng, 1, 3);
  ModelParams m = testutil::random_model(rng, 3);
  Vector lhs = metric_gradient(FunctionalKind::Utility, t, m);
  Vector rhs = sample_gradient(t.sample(0), m, 0.0);
  CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("DP gradient is the zero subgradient on group-symmetric data") {
  EvalSet t = mirrored_set(5, 2, 22);
  auto rng = testutil::make_rng(23);
  ModelParams m = testutil::random_model(rng, 2);
  CHECK(metric_gradient(FunctionalKind::DP, t, m).norm() == 0.0);
}

TEST_CASE("metric gradients match finite differences") {
  auto rng = testutil::make_rng(24);
  for (int rep = 0; rep < 8; ++rep) {
    Index d = 2 + static_cast<Index>(rng.below(3));
    EvalSet t = testutil::random_eval_set(rng, 16, d);
    ModelParams m = testutil::random_model(rng, d);

    Vector g_util = metric_gradient(FunctionalKind::Utility, t, m);
    Vector fd_util = testutil::finite_difference(
        [&](const ModelParams& p) { return utility_loss(t, p); }, m);
    CHECK(testutil::max_rel_err(g_util, fd_util) <= 1e-5);

    Vector g_dp = metric_gradient(FunctionalKind::DP, t, m);
    Vector fd_dp = testutil::finite_difference(
        [&](const ModelParams& p) { return demographic_parity(t, p); }, m);
    CHECK(testutil::max_rel_err(g_dp, fd_dp) <= 1e-5);

    Vector g_eop = metric_gradient(FunctionalKind::EOP, t, m);
    Vector fd_eop = testutil::finite_difference(
        [&](const ModelParams& p) { return equal_opportunity(t, p); }, m);
    CHECK(testutil::max_rel_err(g_eop, fd_eop) <= 1e-5);

    AdversarialSet adv = craft_adversarial(t, m, 1.5);
    Vector g_rob = metric_gradient(adv, m);
    Vector fd_rob = testutil::finite_difference(
        [&](const ModelParams& p) { return robustness_loss(adv, p); }, m);
    CHECK(testutil::max_rel_err(g_rob, fd_rob) <= 1e-5);
  }
}

TEST_CASE("robustness gradient demands the adversarial overload") {
  auto rng = testutil::make_rng(25);
  EvalSet t = testutil::random_eval_set(rng, 6, 2);
  CHECK_THROWS_AS(
      metric_gradient(FunctionalKind::Robustness, t, ModelParams::zeros(2)),
      std::invalid_argument);
}
