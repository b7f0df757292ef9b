#pragma once

#include "incscat/greens.hpp"
#include "incscat/krylov.hpp"

namespace incscat {

struct TotalField {
  FieldVector field;
  SolveReport report;
};

// Solves (I - G_D diag(chi)) E_tot = E_inc matrix-free. Non-convergence is
// reported, not thrown; NaN/Inf inputs throw InvalidArgument.
TotalField solve_total_field(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& einc,
                             const SolverOptions& opts = {});

// Same as solve_total_field but throws ConvergenceError when the solve fails.
FieldVector solve_total_field_or_throw(const GreensVolumeOperator& gd, const ContrastMap& chi,
                                       const FieldVector& einc, const SolverOptions& opts = {});

// Transposed system (I - diag(chi) G_D) z = rhs, used by adjoint gradients.
TotalField solve_transposed(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& rhs,
                            const SolverOptions& opts = {});

// ||(I - G_D diag(chi)) e - einc|| / ||einc||, from scratch.
double state_residual(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& e,
                      const FieldVector& einc);

// E_sca = G_S (chi .* E_tot).
FieldVector scattered_field(const GreensSurfaceMatrix& gs, const ContrastMap& chi, const FieldVector& etot);

// Dense LU reference solve of the state equation; grids up to 24 x 24.
FieldVector dense_total_field(const Grid2D& grid, const PhysicsConfig& phys, const ContrastMap& chi,
                              const FieldVector& einc);

inline constexpr std::size_t kDenseOracleMaxCells = 24 * 24;

}  // namespace incscat
