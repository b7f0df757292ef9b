#pragma once

#include <cstdint>

#include "incscat/grid.hpp"
#include "incscat/krylov.hpp"
#include "incscat/random.hpp"

namespace testing {

inline incscat::CVector random_cvector(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  incscat::Rng rng(seed);
  incscat::CVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = {scale * incscat::uniform(rng, -1.0, 1.0), scale * incscat::uniform(rng, -1.0, 1.0)};
  return v;
}

inline double rel_err(const incscat::CVector& a, const incscat::CVector& b) {
  return (a - b).norm() / b.norm();
}

inline incscat::SolverOptions tight(double tol = 1e-12) {
  incscat::SolverOptions o;
  o.rel_tol = tol;
  return o;
}

}  // namespace testing
