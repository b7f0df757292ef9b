#include <doctest.h>

#include "incscat/error.hpp"
#include "incscat/metrics.hpp"
#include "incscat/retrieval.hpp"
#include "incscat/split.hpp"
#include "support.hpp"

using namespace incscat;

namespace {

const PhysicsConfig kPhys(1e9);

struct Problem {
  Grid2D grid;
  GreensVolumeOperator gd;
  GreensSurfaceMatrix gs;
  RandomSplitTrial trial;
  FieldVector einc;
  FieldVector esca0;

  Problem(std::size_t n, std::uint64_t seed, std::size_t bw, double max_abs, std::size_t ns = 32)
      : grid(n, n, 0.01, 0.01),
        gd(grid, kPhys),
        gs(grid, ReceiverRing(5.0, ns), kPhys),
        trial(make_block_split_trial(grid, seed, bw, bw, max_abs, false)),
        einc(incident_field(grid, kPhys, trial.wave)) {
    const ContrastMap full = compose_full_contrast(trial.split, trial.chi_p2);
    esca0 = scattered_field(gs, full, solve_total_field_or_throw(gd, full, einc, testing::tight(1e-13)));
  }

  MisfitProblem misfit(double lambda = 0.0, double tol = 1e-12) const {
    return MisfitProblem(trial.split, gs, gd, einc, esca0, lambda, testing::tight(tol));
  }
};

}  // namespace

TEST_CASE("misfit vanishes at the truth and is positive at zero") {
  Problem p(10, 1, 3, 0.5);
  const auto f = p.misfit();
  CHECK(f.value(p.trial.chi_p2) <= 1e-16);
  CHECK(f.value(ContrastMap(p.grid)) > 1e-4);
  const auto fl = p.misfit(0.3);
  CHECK(fl.value(p.trial.chi_p2) <= 1e-16 + 0.3 * p.trial.chi_p2.values().squaredNorm());
  CHECK(fl.value(p.trial.chi_p2) >= 0.3 * p.trial.chi_p2.values().squaredNorm() - 1e-16);
}

TEST_CASE("misfit is invariant under joint scaling of incident field and data") {
  Problem p(8, 2, 2, 0.5);
  const ContrastMap guess(p.grid, p.trial.chi_p2.values() * 0.5);
  const double f1 = p.misfit().value(guess);
  const MisfitProblem scaled(p.trial.split, p.gs, p.gd, {p.einc.values * 2.0, FieldDomain::grid},
                             {p.esca0.values * 2.0, FieldDomain::receivers}, 0.0, testing::tight());
  CHECK(scaled.value(guess) == doctest::Approx(f1).epsilon(1e-9));
}

TEST_CASE("adjoint gradient matches central differences") {
  for (std::uint64_t seed : {3, 4}) {
    Problem p(8, seed, 3, 1.0);
    const auto f = p.misfit(0.01, 1e-14);
    const ContrastMap x(p.grid, p.trial.chi_p2.values() * 0.6);
    const CVector g = f.gradient(x);
    const double h = 1e-6;
    CVector fd = CVector::Zero(g.size());
    for (std::size_t m = 0; m < p.grid.size(); ++m) {
      if (!p.trial.split.mask_p2()[m]) continue;
      for (cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        ContrastMap xp = x, xm = x;
        xp.values()[m] += h * dir;
        xm.values()[m] -= h * dir;
        const double d = (f.value(xp) - f.value(xm)) / (2 * h);
        // df/dRe = 2 Re(g), df/dIm = 2 Im(g) for g = df/d(conj chi).
        fd[m] += dir == cplx{1.0, 0.0} ? cplx{0.5 * d, 0.0} : cplx{0.0, 0.5 * d};
      }
    }
    CHECK(testing::rel_err(fd, g) <= 1e-6);
  }
}

TEST_CASE("gradient is masked and vanishes at the truth") {
  Problem p(10, 5, 3, 0.5);
  const auto f = p.misfit();
  const CVector g0 = f.gradient(ContrastMap(p.grid));
  for (std::size_t m = 0; m < p.grid.size(); ++m)
    if (!p.trial.split.mask_p2()[m]) CHECK(g0[m] == cplx{});
  CHECK(f.gradient(p.trial.chi_p2).norm() <= 1e-8 * g0.norm());
}

TEST_CASE("single unknown cell is recovered from noiseless data") {
  Problem p(16, 7, 1, 0.5);
  InversionOptions o;
  o.solver = testing::tight(1e-12);
  const InversionResult r = invert_chi_p2(p.misfit(), o);
  CHECK(relative_error(r.chi_p2.values(), p.trial.chi_p2.values()) <= 1e-3);
  for (std::size_t k = 1; k < r.trace.objective.size(); ++k)
    CHECK(r.trace.objective[k] <= r.trace.objective[k - 1]);
  // Deterministic.
  const InversionResult r2 = invert_chi_p2(p.misfit(), o);
  CHECK(r2.chi_p2.values() == r.chi_p2.values());
  CHECK(r2.trace.objective == r.trace.objective);
}

TEST_CASE("single unknown cell under one percent data noise") {
  Problem p(16, 8, 1, 0.5);
  Rng rng(99);
  const double sigma = 0.01 * p.esca0.values.norm() / std::sqrt(2.0 * p.esca0.size());
  FieldVector noisy = p.esca0;
  for (auto& v : noisy.values) v += sigma * cplx{standard_normal(rng), standard_normal(rng)};
  const MisfitProblem f(p.trial.split, p.gs, p.gd, p.einc, noisy, 0.0, testing::tight());
  const InversionResult r = invert_chi_p2(f, {});
  CHECK(relative_error(r.chi_p2.values(), p.trial.chi_p2.values()) <= 5e-2);
}

TEST_CASE("closed-form initializer reports its own objective at iteration zero") {
  Problem p(8, 9, 2, 0.5);
  const auto f = p.misfit();
  InversionOptions o;
  o.max_outer_iters = 3;
  const InversionResult r = invert_chi_p2(f, o, InversionInit::closed_form_estimate);
  const FieldVector e_p1 = known_part_field(p.trial.split, p.gd, p.einc, f.solver());
  const CMatrix a = materialize_A(p.trial.split, p.gd, f.solver(), MaterializePath::dense_lu);
  const Chi2Estimate est = estimate_chi_p2(p.trial.split, p.esca0, e_p1, p.gs, a, p.gd, p.einc, 1e-12, f.solver());
  CHECK(r.trace.objective.front() == doctest::Approx(f.value(est.chi_p2)).epsilon(1e-12));
  CHECK(r.trace.objective.back() <= r.trace.objective.front());
}

TEST_CASE("box bounds are respected") {
  Problem p(10, 10, 3, 0.5);
  InversionOptions o;
  o.max_outer_iters = 30;
  o.bounds = ContrastBox{0.0, 0.1, 0.0, 0.05};
  const InversionResult r = invert_chi_p2(p.misfit(), o);
  for (std::size_t m = 0; m < p.grid.size(); ++m) {
    CHECK(r.chi_p2[m].real() >= 0.0);
    CHECK(r.chi_p2[m].real() <= 0.1);
    CHECK(r.chi_p2[m].imag() >= 0.0);
    CHECK(r.chi_p2[m].imag() <= 0.05);
  }
}

TEST_CASE("exhausted line search returns the current iterate unconverged") {
  Problem p(8, 11, 2, 0.5);
  InversionOptions o;
  o.max_shrinks = 0;
  o.max_outer_iters = 200;
  o.grad_tol = 1e-300;
  const InversionResult r = invert_chi_p2(p.misfit(), o);
  CHECK_FALSE(r.trace.converged);
  CHECK(r.trace.objective.back() <= r.trace.objective.front());
}

TEST_CASE("options and problem validation") {
  InversionOptions o;
  o.armijo_c = 1.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.shrink = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.bounds = ContrastBox{1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  Problem p(4, 1, 1, 0.5);
  CHECK_THROWS_AS(MisfitProblem(p.trial.split, p.gs, p.gd, p.einc, {CVector::Zero(32), FieldDomain::receivers}),
                  InvalidArgument);
  CHECK_THROWS_AS(MisfitProblem(p.trial.split, p.gs, p.gd, p.einc, p.esca0, -1.0), InvalidArgument);
}
