#include "incscat/krylov.hpp"

#include <cmath>
#include <vector>

#include "incscat/error.hpp"

namespace incscat {

void SolverOptions::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidArgument("solver rel_tol must lie in (0, 1)");
  if (max_iters < 1) throw InvalidArgument("solver max_iters must be at least 1");
  if (method != "gmres" && method != "bicgstab") throw InvalidArgument("unknown Krylov method '" + method + "'");
  if (method == "gmres" && restart < 1) throw InvalidArgument("GMRES restart must be at least 1");
}

cplx dot(const CVector& a, const CVector& b) {
  cplx s{};
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double norm2(const CVector& a) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::norm(a[i]);
  return std::sqrt(s);
}

namespace {

double true_residual(const LinearOperator& a, const CVector& b, const CVector& x, CVector& r, CVector& scratch) {
  a(x, scratch);
  r = b - scratch;
  return norm2(r);
}

SolveReport gmres(const LinearOperator& a, const CVector& b, CVector& x, const SolverOptions& opts, double bnorm) {
  const Eigen::Index n = b.size();
  const auto m = static_cast<Eigen::Index>(std::min<std::size_t>(opts.restart, static_cast<std::size_t>(n)));
  SolveReport rep;
  CVector r = b;
  CVector w(n);
  double rnorm = bnorm;

  std::vector<CVector> v(static_cast<std::size_t>(m + 1));
  CMatrix h = CMatrix::Zero(m + 1, m);
  std::vector<double> cs(static_cast<std::size_t>(m));
  std::vector<cplx> sn(static_cast<std::size_t>(m));
  CVector g(m + 1);

  while (rep.iterations < opts.max_iters) {
    if (rnorm <= opts.rel_tol * bnorm) break;
    v[0] = r / rnorm;
    g.setZero();
    g[0] = rnorm;
    h.setZero();
    Eigen::Index k = 0;
    for (; k < m && rep.iterations < opts.max_iters; ++k) {
      a(v[static_cast<std::size_t>(k)], w);
      ++rep.iterations;
      for (Eigen::Index i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        h(i, k) = dot(v[static_cast<std::size_t>(i)], w);
        w -= h(i, k) * v[static_cast<std::size_t>(i)];
      }
      const double hnext = norm2(w);
      for (Eigen::Index i = 0; i < k; ++i) {  // previous rotations
        const auto iu = static_cast<std::size_t>(i);
        const cplx t = cs[iu] * h(i, k) + sn[iu] * h(i + 1, k);
        h(i + 1, k) = -std::conj(sn[iu]) * h(i, k) + cs[iu] * h(i + 1, k);
        h(i, k) = t;
      }
      const cplx hk = h(k, k);
      const double denom = std::hypot(std::abs(hk), hnext);
      const auto ku = static_cast<std::size_t>(k);
      if (std::abs(hk) == 0.0) {
        cs[ku] = 0.0;
        sn[ku] = 1.0;
      } else {
        cs[ku] = std::abs(hk) / denom;
        sn[ku] = (hk / std::abs(hk)) * hnext / denom;
      }
      h(k, k) = cs[ku] * hk + sn[ku] * hnext;
      g[k + 1] = -std::conj(sn[ku]) * g[k];
      g[k] = cs[ku] * g[k];
      const bool breakdown = hnext <= 1e-300;
      if (!breakdown) v[ku + 1] = w / hnext;
      if (std::abs(g[k + 1]) <= 0.5 * opts.rel_tol * bnorm || breakdown) {
        ++k;
        break;
      }
    }
    // Back substitution on the k x k triangle, then update x.
    CVector y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (Eigen::Index i = 0; i < k; ++i) x += y[i] * v[static_cast<std::size_t>(i)];
    rnorm = true_residual(a, b, x, r, w);
    if (!std::isfinite(rnorm)) break;
  }
  rep.final_rel_residual = rnorm / bnorm;
  rep.converged = rep.final_rel_residual <= opts.rel_tol;
  return rep;
}

SolveReport bicgstab(const LinearOperator& a, const CVector& b, CVector& x, const SolverOptions& opts, double bnorm) {
  const Eigen::Index n = b.size();
  SolveReport rep;
  CVector r = b;
  CVector scratch(n);
  double rnorm = bnorm;
  const double target = opts.rel_tol * bnorm;

  // Outer loop restarts from the true residual whenever the recurrence claims
  // convergence that the true residual does not confirm, or on breakdown.
  while (rep.iterations < opts.max_iters && rnorm > target) {
    const CVector r_hat = r;
    CVector p = CVector::Zero(n), v = CVector::Zero(n), s(n), t(n);
    cplx rho = 1.0, alpha = 1.0, omega = 1.0;
    while (rep.iterations < opts.max_iters) {
      const cplx rho_new = dot(r_hat, r);
      if (std::abs(rho_new) == 0.0) break;
      const cplx beta = (rho_new / rho) * (alpha / omega);
      rho = rho_new;
      p = r + beta * (p - omega * v);
      a(p, v);
      ++rep.iterations;
      const cplx rv = dot(r_hat, v);
      if (std::abs(rv) == 0.0) break;
      alpha = rho / rv;
      s = r - alpha * v;
      if (norm2(s) <= 0.5 * target) {
        x += alpha * p;
        break;
      }
      a(s, t);
      const double tt = std::norm(norm2(t));
      if (tt == 0.0) {
        x += alpha * p;
        break;
      }
      omega = dot(t, s) / tt;
      x += alpha * p + omega * s;
      r = s - omega * t;
      if (norm2(r) <= 0.5 * target || std::abs(omega) == 0.0) break;
    }
    rnorm = true_residual(a, b, x, r, scratch);
    if (!std::isfinite(rnorm)) break;
  }
  rep.final_rel_residual = rnorm / bnorm;
  rep.converged = rep.final_rel_residual <= opts.rel_tol;
  return rep;
}

}  // namespace

SolveReport krylov_solve(const LinearOperator& a, const CVector& b, CVector& x, const SolverOptions& opts) {
  opts.validate();
  x = CVector::Zero(b.size());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return {0, 0.0, true};
  if (opts.method == "bicgstab") return bicgstab(a, b, x, opts, bnorm);
  return gmres(a, b, x, opts, bnorm);
}

}  // namespace incscat
