#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "testutil.hpp"
#include "unlearn/kernels.hpp"

using namespace unlearn;
namespace k = unlearn::kernels;

namespace {

std::vector<k::Backend> available_backends() {
  std::vector<k::Backend> out = {k::Backend::Scalar};
  for (k::Backend b : {k::Backend::Avx2, k::Backend::Neon})
    if (k::backend_available(b)) out.push_back(b);
  return out;
}

}  // namespace

TEST_CASE("backend listing and names") {
  CHECK(k::backend_available(k::Backend::Scalar));
  CHECK(k::backend_available(k::Backend::Auto));
  CHECK(std::string(k::backend_name(k::active_backend())) != "?");
}

TEST_CASE("compensated sum survives catastrophic cancellation") {
  std::vector<double> xs = {1e16, 1.0, -1e16, 1.0};
  for (k::Backend b : available_backends()) {
    const auto& ops = k::detail::ops_for(b);
    CHECK(ops.sum(xs.data(), xs.size()) == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("variants agree with the scalar reference") {
  auto rng = testutil::make_rng(1234);
  const auto& ref = k::detail::ops_for(k::Backend::Scalar);
  for (std::size_t n : {1u, 2u, 3u, 7u, 64u, 257u, 1000u}) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal() * std::pow(10.0, static_cast<double>(i % 7) - 3.0);
      b[i] = rng.normal();
    }
    for (k::Backend bk : available_backends()) {
      const auto& ops = k::detail::ops_for(bk);
      CHECK(ops.sum(a.data(), n) ==
            doctest::Approx(ref.sum(a.data(), n)).epsilon(1e-13));
      CHECK(ops.dot(a.data(), b.data(), n) ==
            doctest::Approx(ref.dot(a.data(), b.data(), n)).epsilon(1e-13));
    }
  }
}

TEST_CASE("matrix kernels match across variants and against Eigen") {
  auto rng = testutil::make_rng(99);
  for (auto [n, d] : std::vector<std::pair<std::size_t, std::size_t>>{
           {5, 1}, {17, 3}, {64, 8}, {33, 5}}) {
    RowMatrix X(static_cast<Index>(n), static_cast<Index>(d));
    Vector v(static_cast<Index>(d)), w(static_cast<Index>(n));
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
      w[i] = rng.normal();
    }
    for (Index j = 0; j < v.size(); ++j) v[j] = rng.normal();
    const double b0 = 0.37;

    Vector margins_ref = X * v;
    margins_ref.array() += b0;
    Vector acc_ref = X.transpose() * w;
    Matrix outer_ref = Matrix::Zero(X.cols(), X.cols());
    for (Index i = 0; i < X.rows(); ++i)
      outer_ref += w[i] * X.row(i).transpose() * X.row(i);

    for (k::Backend bk : available_backends()) {
      const auto& ops = k::detail::ops_for(bk);
      Vector margins(X.rows());
      ops.margins(X.data(), n, d, v.data(), b0, margins.data());
      CHECK((margins - margins_ref).lpNorm<Eigen::Infinity>() <= 1e-12);

      Vector acc(X.cols());
      ops.weighted_feature_sum(X.data(), n, d, w.data(), acc.data());
      CHECK((acc - acc_ref).lpNorm<Eigen::Infinity>() <= 1e-12);

      RowMatrix h(X.cols(), X.cols());
      ops.weighted_outer_accumulate(X.data(), n, d, w.data(), h.data());
      CHECK((Matrix(h) - outer_ref).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
  }
}

TEST_CASE("set_backend switches and rejects unavailable variants") {
  k::set_backend(k::Backend::Scalar);
  CHECK(k::active_backend() == k::Backend::Scalar);
  std::vector<double> xs = {1.0, 2.0, 3.0};
  CHECK(k::sum(xs.data(), 3) == 6.0);
  // At most one of the ISA variants can exist in a single build.
  k::Backend missing = k::backend_available(k::Backend::Avx2)
                           ? k::Backend::Neon
                           : k::Backend::Avx2;
  CHECK_THROWS_AS(k::set_backend(missing), std::invalid_argument);
  k::set_backend(k::Backend::Auto);
}
