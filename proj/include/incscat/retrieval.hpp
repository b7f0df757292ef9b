#pragma once

// Coupling-aware retrieval of the unknown contrast from one scattered-field
// record. The state equation is solved exactly for every trial contrast, so
// the interaction between the known and the unknown parts is always honoured.
//
//   f(chi_p2) = ||G_S (X1 + X2) E_tot(chi_p2) - E_sca0||^2 / ||E_sca0||^2
//               + lambda ||chi_p2||^2
//
// The gradient is the Wirtinger derivative with respect to conj(chi_p2),
// obtained from one forward and one transposed (adjoint) solve.

#include <optional>
#include <vector>

#include "incscat/forward.hpp"

namespace incscat {

struct ContrastBox {
  double re_min = -1.0;
  double re_max = 10.0;
  double im_min = -10.0;
  double im_max = 10.0;
};

struct InversionOptions {
  std::size_t max_outer_iters = 500;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  std::size_t max_shrinks = 60;
  double grad_tol = 1e-8;  // on ||g_k|| / ||g_0||
  double tikhonov_lambda = 0.0;
  std::optional<ContrastBox> bounds;
  SolverOptions solver;

  void validate() const;
};

struct InversionTrace {
  std::vector<double> objective;  // objective[k] after k accepted steps
  std::size_t iterations = 0;
  bool converged = false;
  std::string stop_reason;
};

class MisfitProblem {
 public:
  MisfitProblem(const SplitProfile& split, const GreensSurfaceMatrix& gs, const GreensVolumeOperator& gd,
                FieldVector einc, FieldVector esca0, double tikhonov_lambda = 0.0, SolverOptions solver = {});

  const SplitProfile& split() const { return split_; }
  const GreensSurfaceMatrix& gs() const { return gs_; }
  const GreensVolumeOperator& gd() const { return gd_; }
  const FieldVector& einc() const { return einc_; }
  const FieldVector& esca0() const { return esca0_; }
  const SolverOptions& solver() const { return solver_; }
  double lambda() const { return lambda_; }

  double value(const ContrastMap& chi_p2) const;
  // Per-cell df/d(conj chi_p2), zero outside the unknown mask.
  CVector gradient(const ContrastMap& chi_p2) const;
  // Both at once, sharing the forward solve.
  double value_and_gradient(const ContrastMap& chi_p2, CVector& grad) const;

 private:
  const SplitProfile& split_;
  const GreensSurfaceMatrix& gs_;
  const GreensVolumeOperator& gd_;
  FieldVector einc_;
  FieldVector esca0_;
  double lambda_;
  SolverOptions solver_;
  double data_norm_sq_;
};

double data_misfit(const SplitProfile& split, const ContrastMap& chi_p2, const GreensSurfaceMatrix& gs,
                   const GreensVolumeOperator& gd, const FieldVector& einc, const FieldVector& esca0,
                   double tikhonov_lambda = 0.0, const SolverOptions& opts = {});

CVector misfit_gradient(const SplitProfile& split, const ContrastMap& chi_p2, const GreensSurfaceMatrix& gs,
                        const GreensVolumeOperator& gd, const FieldVector& einc, const FieldVector& esca0,
                        double tikhonov_lambda = 0.0, const SolverOptions& opts = {});

enum class InversionInit { zero, closed_form_estimate };

struct InversionResult {
  ContrastMap chi_p2;
  InversionTrace trace;
};

// Gradient descent with Armijo backtracking. The first trial step of each
// iteration is the Barzilai-Borwein length (a Polyak-type length on the first
// iteration); accepted steps never increase the objective.
InversionResult invert_chi_p2(const MisfitProblem& problem, const InversionOptions& opts,
                              InversionInit init = InversionInit::zero);

}  // namespace incscat
