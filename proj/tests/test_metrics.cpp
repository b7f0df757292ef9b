#include <doctest.h>

#include <vector>

#include "incscat/error.hpp"
#include "incscat/metrics.hpp"
#include "support.hpp"

using namespace incscat;

TEST_CASE("relative error examples") {
  const CVector label = testing::random_cvector(10, 1);
  CHECK(relative_error(label, label) == 0.0);
  CHECK(relative_error(CVector(2.0 * label), label) == doctest::Approx(1.0));
  CVector l(2), p(2);
  l << cplx{3, 0}, cplx{0, 4};
  p << cplx{3, 0}, cplx{0, 1};
  CHECK(relative_error(p, l) == doctest::Approx(0.6));
  CHECK_THROWS_AS(relative_error(label, CVector::Zero(10)), InvalidArgument);
  CHECK_THROWS_AS(relative_error(label, CVector::Ones(9)), InvalidArgument);
}

TEST_CASE("mean and sum of relative errors") {
  const std::vector<double> re{0.1, 0.3};
  CHECK(mean_relative_error(re) == doctest::Approx(0.2));
  CHECK(sum_relative_error(re) == doctest::Approx(0.4));
  const ErrorSummary s = summarize_relative_errors(re);
  CHECK(s.count == 2);
  CHECK(summarize_relative_errors({}).mean == 0.0);
}

TEST_CASE("loss uses the unsquared Frobenius norm over M and averages over the batch") {
  const std::vector<CVector> a{testing::random_cvector(4, 2), testing::random_cvector(4, 3)};
  CHECK(mse_loss(a, a, 4) == 0.0);
  CVector p(4), l(4);
  p << 1, 2, 3, 4;
  l << 1, 2, 3, 0;  // difference norm 4
  const std::vector<CVector> pb{p}, lb{l};
  CHECK(mse_loss(pb, lb, 4) == doctest::Approx(1.0));
  const std::vector<CVector> pb2{p, l}, lb2{l, l};
  CHECK(mse_loss(pb2, lb2, 4) == doctest::Approx(0.5));
  CHECK(total_loss(0.2, 0.6) == doctest::Approx(0.4));
  CHECK(total_loss(1.0, 3.0, 0.25, 0.75) == doctest::Approx(2.5));
  CHECK_THROWS_AS(mse_loss({}, {}, 4), InvalidArgument);
  CHECK_THROWS_AS(mse_loss(pb, lb2, 4), InvalidArgument);
  const std::vector<CVector> short_b{CVector::Ones(3)};
  CHECK_THROWS_AS(mse_loss(pb, short_b, 4), InvalidArgument);
}
