#pragma once

#include <span>
#include <vector>

#include "incscat/grid.hpp"

namespace incscat {

// ||pred - label||_F / ||label||_F. Throws on shape mismatch or zero label.
double relative_error(std::span<const cplx> pred, std::span<const cplx> label);
double relative_error(const CVector& pred, const CVector& label);

struct ErrorSummary {
  double mean = 0.0;  // (1/Q) sum RE_q, the figure reported by default
  double sum = 0.0;   // sum RE_q, the un-normalized form
  std::size_t count = 0;
};

ErrorSummary summarize_relative_errors(std::span<const double> errors);
double mean_relative_error(std::span<const double> errors);
double sum_relative_error(std::span<const double> errors);

// (1/B) sum_b ||pred_b - label_b||_F / M. Note the norm is not squared even
// though the quantity is conventionally called a mean square error.
double mse_loss(std::span<const CVector> pred, std::span<const CVector> label, std::size_t m_cells);

inline constexpr double kLossWeight = 0.5;

// beta1 * loss_I + beta2 * loss_II.
inline double total_loss(double loss_i, double loss_ii, double beta1 = kLossWeight, double beta2 = kLossWeight) {
  return beta1 * loss_i + beta2 * loss_ii;
}

}  // namespace incscat
