#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "testutil.hpp"
#include "unlearn/weights.hpp"

using namespace unlearn;

namespace {

QpInstance make_instance(Vector im, Vector iu, double lambda, double delta) {
  QpInstance q;
  q.i_metric = std::move(im);
  q.i_util = std::move(iu);
  q.lambda = lambda;
  q.delta = delta;
  return q;
}

void check_certificate(const QpInstance& q, const WeightVector& w) {
  double pu = w.eps.dot(q.i_util);
  double pm = w.eps.dot(q.i_metric);
  CHECK(pu >= -1e-9);
  CHECK(pm <= q.delta + 1e-9);
  CHECK(w.dual_beta1 >= 0.0);
  CHECK(w.dual_beta2 >= 0.0);
  Vector st = -q.i_metric + 2 * q.lambda * w.eps - w.dual_beta1 * q.i_util +
              w.dual_beta2 * q.i_metric;
  CHECK(st.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(std::abs(w.dual_beta1 * pu) <= 1e-9);
  CHECK(std::abs(w.dual_beta2 * (pm - q.delta)) <= 1e-9);
}

// Stratified instance generators, one per KKT case.
QpInstance random_case_instance(rng::Prng& rng, int want_case) {
  Index n = 3 + static_cast<Index>(rng.below(20));
  Vector im = testutil::random_vector(rng, n);
  Vector iu = testutil::random_vector(rng, n);
  double lambda = 0.3 + 2.0 * rng.uniform();
  double imu = im.dot(iu);
  double im2 = im.squaredNorm();
  switch (want_case) {
    case 1:
      if (imu < 0) iu = -iu;
      return make_instance(im, iu, lambda,
                           im2 / (2 * lambda) * (1.1 + rng.uniform()));
    case 2:
      if (imu < 0) iu = -iu;
      return make_instance(im, iu, lambda,
                           im2 / (2 * lambda) * 0.9 * rng.uniform());
    case 3: {
      if (imu > 0) iu = -iu;
      imu = im.dot(iu);
      double iu2 = iu.squaredNorm();
      double dmin = (im2 - imu * imu / iu2) / (2 * lambda);
      return make_instance(im, iu, lambda, dmin * (1.05 + rng.uniform()));
    }
    default: {
      if (imu > 0) iu = -iu;
      imu = im.dot(iu);
      double iu2 = iu.squaredNorm();
      double dmin = (im2 - imu * imu / iu2) / (2 * lambda);
      return make_instance(im, iu, lambda, dmin * 0.9 * rng.uniform());
    }
  }
}

}  // namespace

TEST_CASE("instance validation") {
  Vector v = Vector::Ones(3);
  CHECK_THROWS_AS(make_instance(v, v, 0.0, 1.0).validate(), DataError);
  CHECK_THROWS_AS(make_instance(v, v, 1.0, -1.0).validate(), DataError);
  CHECK_THROWS_AS(make_instance(v, Vector::Ones(2), 1.0, 1.0).validate(),
                  std::invalid_argument);
}

TEST_CASE("interior case: eps = i_metric / (2 lambda)") {
  auto rng = testutil::make_rng(31);
  Vector im = testutil::random_vector(rng, 6);
  double lambda = 1.3;
  // i_util = i_metric makes the utility constraint loose by construction
  QpInstance q = make_instance(im, im, lambda,
                               im.squaredNorm() / (2 * lambda) * 1.5);
  WeightVector w = solve_analytic(q);
  CHECK(w.case_id == 1);
  CHECK((w.eps - im / (2 * lambda)).lpNorm<Eigen::Infinity>() <= 1e-14);
  check_certificate(q, w);
}

TEST_CASE("metric bound active: eps = delta i_metric / |i_metric|^2") {
  auto rng = testutil::make_rng(32);
  Vector im = testutil::random_vector(rng, 5);
  Vector iu = testutil::random_vector(rng, 5);
  iu -= (im.dot(iu) / im.squaredNorm()) * im;  // orthogonal
  double lambda = 0.9;
  double delta = im.squaredNorm() / (2 * lambda) * 0.4;
  QpInstance q = make_instance(im, iu, lambda, delta);
  WeightVector w = solve_analytic(q);
  CHECK(w.case_id == 2);
  CHECK((w.eps - (delta / im.squaredNorm()) * im).lpNorm<Eigen::Infinity>() <=
        1e-12);
  check_certificate(q, w);
}

TEST_CASE("case classification on easy instances") {
  auto rng = testutil::make_rng(33);
  // orthogonal vectors, loose bound -> case 1
  Vector im(4), iu(4);
  im << 1.0, 0.0, 0.5, 0.0;
  iu << 0.0, 1.0, 0.0, -0.5;
  CHECK(classify_case(make_instance(im, iu, 1.0, 10.0)) == 1);
  // strongly negative inner product with a loose bound -> case 3
  Vector iu2 = -im + 0.05 * iu;
  CHECK(classify_case(make_instance(im, iu2, 1.0, 10.0)) == 3);
  // negative inner product, tight bound -> case 4
  Vector iu3(4);
  iu3 << -0.2, 1.0, -0.1, 0.4;  // slightly negative inner product
  if (im.dot(iu3) > 0) iu3 = -iu3;
  CHECK(classify_case(make_instance(im, iu3, 1.0, 1e-4)) == 4);
  (void)rng;
}

TEST_CASE("boundary tie picks the lowest feasible case and stays continuous") {
  auto rng = testutil::make_rng(34);
  Vector im = testutil::random_vector(rng, 7);
  double lambda = 1.7;
  double delta = im.squaredNorm() / (2 * lambda);  // exact boundary
  QpInstance q = make_instance(im, im, lambda, delta);
  WeightVector w = solve_analytic(q);
  CHECK(w.case_id == 1);
  // cases 1 and 2 coincide at the boundary
  Vector c2 = (delta / im.squaredNorm()) * im;
  CHECK((w.eps - c2).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("lambda scaling: case 1 scales as 1/lambda, cases 2 and 4 ignore it") {
  auto rng = testutil::make_rng(35);
  Vector im = testutil::random_vector(rng, 6);
  Vector iu = testutil::random_vector(rng, 6);
  if (im.dot(iu) < 0) iu = -iu;
  {
    QpInstance a = make_instance(im, iu, 1.0, 1e9);
    QpInstance b = make_instance(im, iu, 4.0, 1e9);
    Vector ea = solve_analytic(a).eps, eb = solve_analytic(b).eps;
    CHECK((4.0 * eb - ea).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  {
    double delta = im.squaredNorm() * 1e-3;
    QpInstance a = make_instance(im, iu, 1.0, delta);
    QpInstance b = make_instance(im, iu, 5.0, delta);
    WeightVector wa = solve_analytic(a), wb = solve_analytic(b);
    CHECK(wa.case_id == 2);
    CHECK(wb.case_id == 2);
    CHECK(wa.eps == wb.eps);  // the closed form contains no lambda
  }
  {
    Vector iun = -iu + 0.3 * im;
    if (im.dot(iun) > 0) iun = -iun;
    double iu2 = iun.squaredNorm();
    double base =
        (im.squaredNorm() - std::pow(im.dot(iun), 2) / iu2);
    QpInstance a = make_instance(im, iun, 1.0, base * 0.1);
    QpInstance b = make_instance(im, iun, 3.0, base * 0.1 / 3.0);
    // delta scaled so both stay in case 4; eps depends only on delta
    WeightVector wa = solve_analytic(a);
    CHECK(wa.case_id == 4);
    QpInstance c = make_instance(im, iun, 3.0, base * 0.1);
    WeightVector wc = solve_analytic(c);
    CHECK(wc.case_id == 4);
    CHECK(wa.eps == wc.eps);
    (void)b;
  }
}

TEST_CASE("numeric solver on trivially solvable instances") {
  auto rng = testutil::make_rng(36);
  Vector im = testutil::random_vector(rng, 5);
  {
    QpInstance q = make_instance(im, im, 2.0, 1e9);
    WeightVector w = solve_numeric(q);
    CHECK((w.eps - im / 4.0).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
  {
    QpInstance q = make_instance(im, im, 2.0, 0.0);
    WeightVector w = solve_numeric(q);
    CHECK(w.eps.lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("vacuous and degenerate instances") {
  Vector zero = Vector::Zero(4);
  Vector iu = Vector::Ones(4);
  WeightVector w = solve_analytic(make_instance(zero, iu, 1.0, 0.5));
  CHECK(w.case_id == 1);
  CHECK(w.eps.norm() == 0.0);
  // anti-parallel vectors kill the case-4 denominator; the fallback must
  // still produce a certified solution
  auto rng = testutil::make_rng(37);
  Vector im = testutil::random_vector(rng, 5);
  QpInstance q = make_instance(im, Vector(-im), 1.0, 1e-3);
  WeightVector wf = solve_analytic(q);
  check_certificate(q, wf);
}

TEST_CASE("boundary instances always classify to a certified candidate") {
  auto rng = testutil::make_rng(39);
  for (int rep = 0; rep < 60; ++rep) {
    Index n = 4 + static_cast<Index>(rng.below(10));
    Vector im = testutil::random_vector(rng, n);
    Vector iu = testutil::random_vector(rng, n);
    double lambda = 0.5 + rng.uniform();
    QpInstance q;
    q.i_metric = im;
    q.i_util = iu;
    q.lambda = lambda;
    // sit exactly on the |i_m|^2 = 2 lambda delta boundary, or on the
    // case-3/4 split, alternating
    if (rep % 2 == 0) {
      if (im.dot(iu) < 0) q.i_util = -iu;
      q.delta = im.squaredNorm() / (2 * lambda);
    } else {
      if (im.dot(iu) > 0) q.i_util = -iu;
      double imu = im.dot(q.i_util);
      q.delta = (im.squaredNorm() - imu * imu / q.i_util.squaredNorm()) /
                (2 * lambda);
    }
    int label = classify_case(q);
    WeightVector w = solve_analytic(q);
    CHECK(label == w.case_id);
    check_certificate(q, w);
  }
}

TEST_CASE("analytic and numeric solvers agree across all four cases") {
  auto rng = testutil::make_rng(38);
  int per_case[5] = {0, 0, 0, 0, 0};
  for (int rep = 0; rep < 200; ++rep) {
    QpInstance q = random_case_instance(rng, 1 + rep % 4);
    WeightVector a = solve_analytic(q);
    WeightVector b = solve_numeric(q);
    per_case[a.case_id]++;
    CHECK((a.eps - b.eps).lpNorm<Eigen::Infinity>() <= 1e-6);
    double oa = qp_objective(q, a.eps), ob = qp_objective(q, b.eps);
    CHECK(oa <= ob + 1e-9);
    CHECK(ob <= oa + 1e-9);
    check_certificate(q, a);
    check_certificate(q, b);
    CHECK(classify_case(q) == a.case_id);
  }
  for (int c = 1; c <= 4; ++c) CHECK(per_case[c] >= 20);
}
