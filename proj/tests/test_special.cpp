#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/bessel_prime.hpp>

#include "incscat/special.hpp"

using namespace incscat;

namespace {
constexpr double kTwoOverPi = 0.63661977236758134308;
}

TEST_CASE("Bessel functions agree with an independent implementation") {
  for (int n : {0, 1, 2, 5, 12, 30}) {
    for (double x : {1e-3, 0.1, 1.0, 4.7, 20.0, 104.8}) {
      const double j = boost::math::cyl_bessel_j(n, x);
      const double y = boost::math::cyl_neumann(n, x);
      CHECK(bessel_j(n, x) == doctest::Approx(j).epsilon(1e-9).scale(1e-300));
      CHECK(bessel_y(n, x) == doctest::Approx(y).epsilon(1e-9));
      CHECK(bessel_j_prime(n, x) ==
            doctest::Approx(boost::math::cyl_bessel_j_prime(n, x)).epsilon(1e-8).scale(1e-12));
    }
  }
}

TEST_CASE("negative orders follow the parity relation") {
  for (int n : {1, 2, 3}) {
    const double sign = n % 2 ? -1.0 : 1.0;
    CHECK(bessel_j(-n, 2.3) == doctest::Approx(sign * bessel_j(n, 2.3)));
    CHECK(bessel_y(-n, 2.3) == doctest::Approx(sign * bessel_y(n, 2.3)));
  }
}

TEST_CASE("Hankel Wronskian J Y' - J' Y = 2 / (pi x)") {
  // With H = J - jY, Im(conj(H) H') = -(J Y' - J' Y).
  for (int n : {0, 1, 4, 10}) {
    for (double x : {0.05, 0.7, 3.0, 25.0}) {
      const auto h = hankel2(n, x);
      const auto hp = hankel2_prime(n, x);
      const double w = -(std::conj(h) * hp).imag();
      CHECK(w == doctest::Approx(kTwoOverPi / x).epsilon(1e-9));
    }
  }
}

TEST_CASE("outgoing convention: H0^(2) ~ sqrt(2 / (pi x)) exp(-j (x - pi/4))") {
  const double x = 2000.0;
  const auto h = hankel2(0, x);
  const auto ref = std::sqrt(kTwoOverPi / x) * std::exp(std::complex<double>(0.0, -(x - 0.25 * 3.14159265358979323846)));
  CHECK(std::abs(h - ref) / std::abs(ref) < 1e-3);
}
