#pragma once

#include <complex>

namespace incscat {

// Cylinder functions of integer order and real positive argument, thin
// wrappers over the C++17 mathematical special functions.
double bessel_j(int n, double x);
double bessel_y(int n, double x);
double bessel_j_prime(int n, double x);

// H_n^(2)(x) = J_n(x) - j Y_n(x), the outgoing kernel under exp(+j w t).
std::complex<double> hankel2(int n, double x);
std::complex<double> hankel2_prime(int n, double x);

}  // namespace incscat
