#include "incscat/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "incscat/error.hpp"
#include "incscat/split.hpp"

namespace incscat {

void InversionOptions::validate() const {
  if (max_outer_iters < 1) throw InvalidArgument("max_outer_iters must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("Armijo constant must lie in (0, 1)");
  if (!(shrink > 0.0 && shrink < 1.0)) throw InvalidArgument("line-search shrink factor must lie in (0, 1)");
  if (!(grad_tol > 0.0)) throw InvalidArgument("grad_tol must be positive");
  if (tikhonov_lambda < 0.0) throw InvalidArgument("tikhonov_lambda must be non-negative");
  if (bounds && (bounds->re_min > bounds->re_max || bounds->im_min > bounds->im_max))
    throw InvalidArgument("empty contrast box");
  solver.validate();
}

MisfitProblem::MisfitProblem(const SplitProfile& split, const GreensSurfaceMatrix& gs, const GreensVolumeOperator& gd,
                             FieldVector einc, FieldVector esca0, double tikhonov_lambda, SolverOptions solver)
    : split_(split),
      gs_(gs),
      gd_(gd),
      einc_(std::move(einc)),
      esca0_(std::move(esca0)),
      lambda_(tikhonov_lambda),
      solver_(std::move(solver)) {
  if (!(split_.grid() == gd_.grid()) || !(gs_.grid() == gd_.grid()))
    throw InvalidArgument("MisfitProblem: grids of split and operators differ");
  require_on_grid(einc_, gd_.grid(), "MisfitProblem");
  if (esca0_.domain != FieldDomain::receivers || esca0_.size() != gs_.ring().count())
    throw InvalidArgument("MisfitProblem: data does not match the receiver ring");
  if (lambda_ < 0.0) throw InvalidArgument("MisfitProblem: negative Tikhonov weight");
  data_norm_sq_ = esca0_.values.squaredNorm();
  if (data_norm_sq_ == 0.0) throw InvalidArgument("MisfitProblem: scattered-field data is zero");
  solver_.validate();
}

double MisfitProblem::value(const ContrastMap& chi_p2) const {
  const ContrastMap x2 = restrict_to_mask(chi_p2, split_.mask_p2());
  const ContrastMap full = compose_full_contrast(split_, x2);
  const FieldVector e = solve_total_field_or_throw(gd_, full, einc_, solver_);
  const CVector r = scattered_field(gs_, full, e).values - esca0_.values;
  return r.squaredNorm() / data_norm_sq_ + lambda_ * x2.values().squaredNorm();
}

double MisfitProblem::value_and_gradient(const ContrastMap& chi_p2, CVector& grad) const {
  const ContrastMap x2 = restrict_to_mask(chi_p2, split_.mask_p2());
  const ContrastMap full = compose_full_contrast(split_, x2);
  const FieldVector e = solve_total_field_or_throw(gd_, full, einc_, solver_);
  const CVector r = scattered_field(gs_, full, e).values - esca0_.values;
  const double f = r.squaredNorm() / data_norm_sq_ + lambda_ * x2.values().squaredNorm();

  // dr = J dchi with J = G_S [diag(E) + X L^-1 G_D diag(E)], L = I - G_D X.
  // J^H r = conj(E) .* (s + conj(G_D z)) where s = G_S^H r and L^T z = chi .* conj(s).
  const CVector s = gs_.entries().adjoint() * r;
  const FieldVector rhs{full.values().cwiseProduct(s.conjugate()), FieldDomain::grid};
  const TotalField adj = solve_transposed(gd_, full, rhs, solver_);
  if (!adj.report.converged)
    throw ConvergenceError("adjoint solve did not converge: residual " + std::to_string(adj.report.final_rel_residual));
  const CVector back = gd_.apply(adj.field.values).conjugate();
  grad = e.values.conjugate().cwiseProduct(s + back) / data_norm_sq_ + lambda_ * x2.values();
  const auto& mask = split_.mask_p2();
  for (std::size_t m = 0; m < mask.size(); ++m)
    if (!mask[m]) grad[static_cast<Eigen::Index>(m)] = cplx{};
  return f;
}

CVector MisfitProblem::gradient(const ContrastMap& chi_p2) const {
  CVector g;
  value_and_gradient(chi_p2, g);
  return g;
}

double data_misfit(const SplitProfile& split, const ContrastMap& chi_p2, const GreensSurfaceMatrix& gs,
                   const GreensVolumeOperator& gd, const FieldVector& einc, const FieldVector& esca0,
                   double tikhonov_lambda, const SolverOptions& opts) {
  return MisfitProblem(split, gs, gd, einc, esca0, tikhonov_lambda, opts).value(chi_p2);
}

CVector misfit_gradient(const SplitProfile& split, const ContrastMap& chi_p2, const GreensSurfaceMatrix& gs,
                        const GreensVolumeOperator& gd, const FieldVector& einc, const FieldVector& esca0,
                        double tikhonov_lambda, const SolverOptions& opts) {
  return MisfitProblem(split, gs, gd, einc, esca0, tikhonov_lambda, opts).gradient(chi_p2);
}

namespace {

CVector project(const CVector& x, const Mask& mask, const std::optional<ContrastBox>& box) {
  CVector out = x;
  for (std::size_t m = 0; m < mask.size(); ++m) {
    const auto k = static_cast<Eigen::Index>(m);
    if (!mask[m]) {
      out[k] = cplx{};
    } else if (box) {
      out[k] = {std::clamp(out[k].real(), box->re_min, box->re_max), std::clamp(out[k].imag(), box->im_min, box->im_max)};
    }
  }
  return out;
}

CVector initial_guess(const MisfitProblem& problem, InversionInit init) {
  const Grid2D& grid = problem.split().grid();
  if (init == InversionInit::zero) return CVector::Zero(static_cast<Eigen::Index>(grid.size()));
  const auto& split = problem.split();
  const FieldVector e_p1 = known_part_field(split, problem.gd(), problem.einc(), problem.solver());
  const MaterializePath path = grid.size() <= kDenseLuMaxCells ? MaterializePath::dense_lu : MaterializePath::columns;
  const CMatrix a = materialize_A(split, problem.gd(), problem.solver(), path);
  return estimate_chi_p2(split, problem.esca0(), e_p1, problem.gs(), a, problem.gd(), problem.einc(), 1e-12,
                         problem.solver())
      .chi_p2.values();
}

}  // namespace

InversionResult invert_chi_p2(const MisfitProblem& problem, const InversionOptions& opts, InversionInit init) {
  opts.validate();
  const Grid2D& grid = problem.split().grid();
  const Mask& mask = problem.split().mask_p2();
  auto as_map = [&](const CVector& v) { return ContrastMap(grid, v); };

  CVector x = project(initial_guess(problem, init), mask, opts.bounds);
  CVector g;
  double f = problem.value_and_gradient(as_map(x), g);

  InversionTrace trace;
  trace.objective.push_back(f);
  const double g0 = norm2(g);
  double alpha = 0.0;

  while (trace.iterations < opts.max_outer_iters) {
    const double gn = norm2(g);
    if (gn == 0.0 || gn <= opts.grad_tol * g0) {
      trace.converged = true;
      trace.stop_reason = "gradient tolerance";
      break;
    }
    // First step: the length that would zero a linear model of f.
    if (trace.iterations == 0) alpha = f / (2.0 * gn * gn);

    bool accepted = false;
    CVector x_new, g_new;
    double f_new = f;
    for (std::size_t s = 0; s <= opts.max_shrinks; ++s, alpha *= opts.shrink) {
      x_new = project(x - alpha * g, mask, opts.bounds);
      const CVector step = x_new - x;
      if (norm2(step) == 0.0) break;
      // Directional derivative of a real function along step: 2 Re(g^H step).
      const double slope = 2.0 * dot(g, step).real();
      f_new = problem.value_and_gradient(as_map(x_new), g_new);
      if (f_new <= f + opts.armijo_c * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace.stop_reason = "line search failed";
      break;
    }

    const CVector s = x_new - x;
    const CVector y = g_new - g;
    const double sy = dot(s, y).real();
    alpha = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * alpha;  // Barzilai-Borwein
    x = std::move(x_new);
    g = std::move(g_new);
    f = f_new;
    ++trace.iterations;
    trace.objective.push_back(f);
  }
  if (trace.stop_reason.empty()) trace.stop_reason = "iteration limit";
  return {as_map(x), std::move(trace)};
}

}  // namespace incscat
