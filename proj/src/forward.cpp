#include "incscat/forward.hpp"

#include <Eigen/LU>

#include "incscat/error.hpp"

namespace incscat {

namespace {

void check_inputs(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& rhs, const char* what) {
  if (!(chi.grid() == gd.grid())) throw InvalidArgument(std::string(what) + ": contrast grid differs from operator grid");
  require_on_grid(rhs, gd.grid(), what);
  if (!chi.all_finite()) throw InvalidArgument(std::string(what) + ": contrast contains NaN or Inf");
  if (!rhs.values.allFinite()) throw InvalidArgument(std::string(what) + ": right-hand side contains NaN or Inf");
}

}  // namespace

TotalField solve_total_field(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& einc,
                             const SolverOptions& opts) {
  check_inputs(gd, chi, einc, "solve_total_field");
  opts.validate();
  if (chi.is_zero()) return {einc, {0, 0.0, true}};

  const CVector& c = chi.values();
  CVector tmp(c.size());
  const LinearOperator op = [&](const CVector& in, CVector& out) {
    tmp = c.cwiseProduct(in);
    gd.apply({tmp.data(), static_cast<std::size_t>(tmp.size())}, {out.data(), static_cast<std::size_t>(out.size())});
    out = in - out;
  };
  CVector x;
  const SolveReport rep = krylov_solve(op, einc.values, x, opts);
  return {{std::move(x), FieldDomain::grid}, rep};
}

FieldVector solve_total_field_or_throw(const GreensVolumeOperator& gd, const ContrastMap& chi,
                                       const FieldVector& einc, const SolverOptions& opts) {
  auto sol = solve_total_field(gd, chi, einc, opts);
  if (!sol.report.converged)
    throw ConvergenceError("state equation did not converge: residual " + std::to_string(sol.report.final_rel_residual) +
                           " after " + std::to_string(sol.report.iterations) + " iterations");
  return std::move(sol.field);
}

TotalField solve_transposed(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& rhs,
                            const SolverOptions& opts) {
  check_inputs(gd, chi, rhs, "solve_transposed");
  opts.validate();
  if (chi.is_zero()) return {rhs, {0, 0.0, true}};

  const CVector& c = chi.values();
  CVector tmp(c.size());
  const LinearOperator op = [&](const CVector& in, CVector& out) {
    gd.apply({in.data(), static_cast<std::size_t>(in.size())}, {tmp.data(), static_cast<std::size_t>(tmp.size())});
    out = in - c.cwiseProduct(tmp);
  };
  CVector x;
  const SolveReport rep = krylov_solve(op, rhs.values, x, opts);
  return {{std::move(x), FieldDomain::grid}, rep};
}

double state_residual(const GreensVolumeOperator& gd, const ContrastMap& chi, const FieldVector& e,
                      const FieldVector& einc) {
  check_inputs(gd, chi, e, "state_residual");
  require_on_grid(einc, gd.grid(), "state_residual");
  const CVector r = einc.values - (e.values - gd.apply(chi.values().cwiseProduct(e.values)));
  return norm2(r) / norm2(einc.values);
}

FieldVector scattered_field(const GreensSurfaceMatrix& gs, const ContrastMap& chi, const FieldVector& etot) {
  if (!(chi.grid() == gs.grid())) throw InvalidArgument("scattered_field: contrast grid differs from operator grid");
  require_on_grid(etot, gs.grid(), "scattered_field");
  return {gs.entries() * chi.values().cwiseProduct(etot.values), FieldDomain::receivers};
}

FieldVector dense_total_field(const Grid2D& grid, const PhysicsConfig& phys, const ContrastMap& chi,
                              const FieldVector& einc) {
  if (grid.size() > kDenseOracleMaxCells) throw InvalidArgument("dense_total_field: grid too large for the dense path");
  require_on_grid(einc, grid, "dense_total_field");
  const CMatrix g = assemble_dense_volume(grid, phys);
  const auto n = static_cast<Eigen::Index>(grid.size());
  const CMatrix system = CMatrix::Identity(n, n) - g * chi.values().asDiagonal();
  return {system.partialPivLu().solve(einc.values), FieldDomain::grid};
}

}  // namespace incscat
