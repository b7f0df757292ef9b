#include "incscat/split.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>

#include "incscat/error.hpp"
#include "incscat/random.hpp"

namespace incscat {

namespace {

void check_split_grid(const SplitProfile& split, const GreensVolumeOperator& gd, const char* what) {
  if (!(split.grid() == gd.grid())) throw InvalidArgument(std::string(what) + ": split grid differs from operator grid");
}

// Inner solves of the nested path must be well below the outer tolerance for
// the outer Krylov iteration to see a consistent operator.
SolverOptions inner_options(const SolverOptions& outer) {
  SolverOptions inner = outer;
  inner.rel_tol = std::min(outer.rel_tol * 1e-2, 1e-12);
  inner.method = "gmres";
  return inner;
}

double rel_diff(const CVector& a, const CVector& b) {
  const double nb = norm2(b);
  return nb == 0.0 ? norm2(a - b) : norm2(a - b) / nb;
}

}  // namespace

FieldVector known_part_field(const SplitProfile& split, const GreensVolumeOperator& gd, const FieldVector& einc,
                             const SolverOptions& opts) {
  check_split_grid(split, gd, "known_part_field");
  return solve_total_field_or_throw(gd, split.chi_p1(), einc, opts);
}

FieldVector apply_A(const SplitProfile& split, const GreensVolumeOperator& gd, const FieldVector& v,
                    const SolverOptions& opts) {
  check_split_grid(split, gd, "apply_A");
  require_on_grid(v, gd.grid(), "apply_A");
  const FieldVector gv{gd.apply(v.values), FieldDomain::grid};
  return solve_total_field_or_throw(gd, split.chi_p1(), gv, opts);
}

CMatrix materialize_A(const SplitProfile& split, const GreensVolumeOperator& gd, const SolverOptions& opts,
                      MaterializePath path, std::size_t cap) {
  check_split_grid(split, gd, "materialize_A");
  const std::size_t m_total = gd.grid().size();
  if (m_total > cap)
    throw InvalidArgument("materialize_A: " + std::to_string(m_total) + " cells exceed the cap of " + std::to_string(cap));
  const auto n = static_cast<Eigen::Index>(m_total);

  if (path == MaterializePath::dense_lu) {
    if (m_total > kDenseLuMaxCells) throw InvalidArgument("materialize_A: dense LU path limited to 1024 cells");
    const CMatrix g = assemble_dense_volume(gd.grid(), gd.phys());
    const CMatrix system = CMatrix::Identity(n, n) - g * split.chi_p1().values().asDiagonal();
    return system.partialPivLu().solve(g);
  }

  CMatrix a(n, n);
  std::atomic<bool> failed{false};
  std::string failure;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index col = 0; col < n; ++col) {
    if (failed.load()) continue;
    FieldVector e = FieldVector::zeros(gd.grid());
    e.values[col] = 1.0;
    try {
      a.col(col) = apply_A(split, gd, e, opts).values;
    } catch (const Error& err) {
#pragma omp critical(materialize_failure)
      {
        if (!failed.exchange(true)) failure = err.what();
      }
    }
  }
  if (failed.load()) throw ConvergenceError("materialize_A: " + failure);
  return a;
}

FieldVector delta_total_field(const SplitProfile& split, const ContrastMap& chi_p2, const GreensVolumeOperator& gd,
                              const FieldVector& einc, const SolverOptions& opts) {
  check_split_grid(split, gd, "delta_total_field");
  const FieldVector e_p1 = known_part_field(split, gd, einc, opts);
  const ContrastMap full = compose_full_contrast(split, chi_p2);
  const FieldVector e_tot = solve_total_field_or_throw(gd, full, einc, opts);
  return {e_tot.values - e_p1.values, FieldDomain::grid};
}

FieldVector delta_total_field_nested(const SplitProfile& split, const ContrastMap& chi_p2,
                                     const GreensVolumeOperator& gd, const FieldVector& einc,
                                     const SolverOptions& opts) {
  check_split_grid(split, gd, "delta_total_field_nested");
  opts.validate();
  const FieldVector e_p1 = known_part_field(split, gd, einc, inner_options(opts));
  const ContrastMap x2 = restrict_to_mask(chi_p2, split.mask_p2());
  const SolverOptions inner = inner_options(opts);

  const LinearOperator op = [&](const CVector& in, CVector& out) {
    const FieldVector v{x2.values().cwiseProduct(in), FieldDomain::grid};
    out = in - apply_A(split, gd, v, inner).values;
  };
  CVector u;
  const SolveReport rep = krylov_solve(op, e_p1.values, u, opts);
  if (!rep.converged)
    throw ConvergenceError("nested (I - A X2) solve did not converge: residual " + std::to_string(rep.final_rel_residual));
  return {u - e_p1.values, FieldDomain::grid};
}

FieldVector scattered_field_split(const SplitProfile& split, const ContrastMap& chi_p2, const GreensSurfaceMatrix& gs,
                                  const GreensVolumeOperator& gd, const FieldVector& einc, const SolverOptions& opts) {
  const FieldVector e_p1 = known_part_field(split, gd, einc, opts);
  const FieldVector delta = delta_total_field(split, chi_p2, gd, einc, opts);
  const ContrastMap full = compose_full_contrast(split, chi_p2);
  const FieldVector e_tot{e_p1.values + delta.values, FieldDomain::grid};
  return scattered_field(gs, full, e_tot);
}

Chi2Estimate estimate_chi_p2(const SplitProfile& split, const FieldVector& esca0, const FieldVector& e_p1,
                             const GreensSurfaceMatrix& gs, const CMatrix& a_dense, const GreensVolumeOperator& gd,
                             const FieldVector& einc, double pinv_threshold, const SolverOptions& opts) {
  const Grid2D& grid = split.grid();
  const auto n = static_cast<Eigen::Index>(grid.size());
  if (!(gs.grid() == grid)) throw InvalidArgument("estimate_chi_p2: surface matrix grid differs from split grid");
  require_on_grid(e_p1, grid, "estimate_chi_p2");
  if (esca0.domain != FieldDomain::receivers || esca0.size() != gs.ring().count())
    throw InvalidArgument("estimate_chi_p2: scattered field does not match the receiver ring");
  if (a_dense.rows() != n || a_dense.cols() != n) throw InvalidArgument("estimate_chi_p2: A has the wrong shape");
  const double ep1_sq = std::norm(norm2(e_p1.values));
  if (ep1_sq == 0.0) throw InvalidArgument("estimate_chi_p2: E_p1 is zero");

  // P = u e^H / (e^H e) is rank one, so P A = u w^H with w = A^H e / (e^H e)
  // and, by Sherman-Morrison, X2_hat = (I + u w^H)^-1 (P - X1) = u q^T - X1.
  const CVector& e = e_p1.values;
  const CVector& x1 = split.chi_p1().values();
  const CVector u = pseudo_inverse_surface(gs, pinv_threshold) * esca0.values;
  const CVector w = a_dense.adjoint() * e / ep1_sq;
  const cplx wu = dot(w, u);
  const cplx denom = 1.0 + wu;

  Chi2Estimate est{ContrastMap(grid), CVector(n), {}};
  CVector diag(n);
  double offdiag_sq = 0.0;
  double total_sq = 0.0;
  if (std::abs(denom) > 1e-12 * std::max(1.0, std::abs(wu))) {
    // (w^H B)_k for B = P - X1
    const CVector z = (wu / ep1_sq) * e.conjugate() - w.conjugate().cwiseProduct(x1);
    const CVector q = e.conjugate() / ep1_sq - z / denom;
    diag = u.cwiseProduct(q) - x1;
    // sum_k |u_k|^2 sum_{l != k} |q_l|^2 from prefix and suffix sums, free of
    // the cancellation in |u|^2 |q|^2 - sum_k |u_k q_k|^2.
    std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
    for (Eigen::Index k = n - 1; k >= 0; --k) suffix[k] = suffix[k + 1] + std::norm(q[k]);
    double prefix = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      offdiag_sq += std::norm(u[k]) * (prefix + suffix[k + 1]);
      prefix += std::norm(q[k]);
    }
    total_sq = offdiag_sq + diag.squaredNorm();
  } else {
    // (I + P A) numerically singular: minimum-norm least-squares solve.
    est.diagnostics.regularized = true;
    const CMatrix p = u * e.adjoint() / ep1_sq;
    const CMatrix lhs = CMatrix::Identity(n, n) + p * a_dense;
    CMatrix b = p;
    b.diagonal() -= x1;
    const CMatrix x2_hat = lhs.completeOrthogonalDecomposition().solve(b);
    diag = x2_hat.diagonal();
    total_sq = x2_hat.squaredNorm();
    offdiag_sq = std::max(0.0, total_sq - diag.squaredNorm());
  }
  est.raw_diagonal = diag;
  est.diagnostics.offdiag_energy_ratio = total_sq > 0.0 ? std::sqrt(offdiag_sq / total_sq) : 0.0;
  est.chi_p2 = restrict_to_mask(ContrastMap(grid, diag), split.mask_p2());

  const ContrastMap full = compose_full_contrast(split, est.chi_p2);
  const FieldVector e_tot = solve_total_field_or_throw(gd, full, einc, opts);
  const FieldVector pred = scattered_field(gs, full, e_tot);
  est.diagnostics.data_residual = rel_diff(pred.values, esca0.values);
  return est;
}

SplitIdentityCheck check_split_identities(const SplitProfile& split, const ContrastMap& chi_p2,
                                          const GreensVolumeOperator& gd, const GreensSurfaceMatrix& gs,
                                          const FieldVector& einc, const SolverOptions& opts) {
  const ContrastMap full = compose_full_contrast(split, chi_p2);
  const FieldVector e_full = solve_total_field_or_throw(gd, full, einc, opts);
  const FieldVector e_p1 = known_part_field(split, gd, einc, opts);
  const FieldVector delta = delta_total_field_nested(split, chi_p2, gd, einc, opts);
  const FieldVector e_split{e_p1.values + delta.values, FieldDomain::grid};

  SplitIdentityCheck out;
  out.field_deviation = rel_diff(e_split.values, e_full.values);
  out.data_deviation = rel_diff(scattered_field(gs, full, e_split).values, scattered_field(gs, full, e_full).values);
  return out;
}

namespace {

RandomSplitTrial draw_split_trial(const Grid2D& grid, Rng& rng, std::size_t bw, std::size_t bh, double max_abs,
                                  bool random_wave) {
  const std::size_t nx = grid.nx();
  const std::size_t ny = grid.ny();
  if (bw == 0 || bh == 0 || bw > nx || bh > ny) throw InvalidArgument("split trial: block does not fit the grid");
  if (!(max_abs > 0.0)) throw InvalidArgument("split trial: max_abs must be positive");
  const std::size_t i0 = uniform_index(rng, nx - bw + 1);
  const std::size_t j0 = uniform_index(rng, ny - bh + 1);

  // Re in [0.1, 1] and Im in [0, 1], scaled so that |chi| <= max_abs.
  const double s = max_abs / std::sqrt(2.0);
  auto draw = [&] { return cplx{s * uniform(rng, 0.1, 1.0), s * uniform01(rng)}; };

  Mask mask(grid.size(), false);
  CVector x1 = CVector::Zero(static_cast<Eigen::Index>(grid.size()));
  CVector x2 = CVector::Zero(x1.size());
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t m = grid.index(i, j);
      const bool in_block = i >= i0 && i < i0 + bw && j >= j0 && j < j0 + bh;
      if (in_block) {
        mask[m] = true;
        x2[static_cast<Eigen::Index>(m)] = draw();
      } else if (uniform01(rng) < 0.3) {
        x1[static_cast<Eigen::Index>(m)] = draw();
      }
    }
  IncidentWave wave{random_wave ? uniform(rng, 0.0, 360.0) : 0.0, {1.0, 0.0}};
  return {SplitProfile(ContrastMap(grid, std::move(x1)), std::move(mask)), ContrastMap(grid, std::move(x2)), wave};
}

}  // namespace

RandomSplitTrial make_random_split_trial(const Grid2D& grid, std::uint64_t seed, double max_abs) {
  Rng rng(splitmix64(seed));
  const std::size_t bw = 1 + uniform_index(rng, std::max<std::size_t>(1, grid.nx() / 3));
  const std::size_t bh = 1 + uniform_index(rng, std::max<std::size_t>(1, grid.ny() / 3));
  return draw_split_trial(grid, rng, bw, bh, max_abs, true);
}

RandomSplitTrial make_block_split_trial(const Grid2D& grid, std::uint64_t seed, std::size_t bw, std::size_t bh,
                                        double max_abs, bool random_wave) {
  Rng rng(splitmix64(seed));
  return draw_split_trial(grid, rng, bw, bh, max_abs, random_wave);
}

}  // namespace incscat
