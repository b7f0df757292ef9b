#include "incscat/special.hpp"

#include <cmath>

namespace incscat {

namespace {
// std::cyl_* take a non-negative order; J_{-n} = (-1)^n J_n and likewise Y.
double parity(int n) { return (n % 2 == 0) ? 1.0 : -1.0; }
}  // namespace

double bessel_j(int n, double x) {
  if (n < 0) return parity(n) * std::cyl_bessel_j(static_cast<double>(-n), x);
  return std::cyl_bessel_j(static_cast<double>(n), x);
}

double bessel_y(int n, double x) {
  if (n < 0) return parity(n) * std::cyl_neumann(static_cast<double>(-n), x);
  return std::cyl_neumann(static_cast<double>(n), x);
}

double bessel_j_prime(int n, double x) { return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x)); }

std::complex<double> hankel2(int n, double x) { return {bessel_j(n, x), -bessel_y(n, x)}; }

std::complex<double> hankel2_prime(int n, double x) { return 0.5 * (hankel2(n - 1, x) - hankel2(n + 1, x)); }

}  // namespace incscat
