#pragma once

#include <functional>
#include <string>

#include "incscat/grid.hpp"

namespace incscat {

struct SolverOptions {
  double rel_tol = 1e-10;
  std::size_t max_iters = 2000;
  std::string method = "gmres";  // "gmres" or "bicgstab"
  std::size_t restart = 80;      // GMRES cycle length

  void validate() const;
};

struct SolveReport {
  std::size_t iterations = 0;
  double final_rel_residual = 0.0;  // ||b - A x|| / ||b||, recomputed on return
  bool converged = false;
};

using LinearOperator = std::function<void(const CVector& in, CVector& out)>;

// Solves A x = b from a zero initial guess. Convergence is declared on the
// true residual only, never on the recurrence estimate.
SolveReport krylov_solve(const LinearOperator& a, const CVector& b, CVector& x, const SolverOptions& opts);

// Plain inner product and norm, evaluated serially in a fixed order so that
// repeated solves are bitwise reproducible.
cplx dot(const CVector& a, const CVector& b);  // a^H b
double norm2(const CVector& a);

}  // namespace incscat
