#include "incscat/metrics.hpp"

#include <cmath>

#include "incscat/error.hpp"

namespace incscat {

double relative_error(std::span<const cplx> pred, std::span<const cplx> label) {
  if (pred.size() != label.size()) throw InvalidArgument("relative_error: shape mismatch");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += std::norm(pred[i] - label[i]);
    den += std::norm(label[i]);
  }
  if (den == 0.0) throw InvalidArgument("relative_error: label has zero norm");
  return std::sqrt(num / den);
}

double relative_error(const CVector& pred, const CVector& label) {
  return relative_error(std::span<const cplx>(pred.data(), static_cast<std::size_t>(pred.size())),
                        std::span<const cplx>(label.data(), static_cast<std::size_t>(label.size())));
}

ErrorSummary summarize_relative_errors(std::span<const double> errors) {
  ErrorSummary s;
  s.count = errors.size();
  for (double e : errors) s.sum += e;
  s.mean = errors.empty() ? 0.0 : s.sum / static_cast<double>(errors.size());
  return s;
}

double mean_relative_error(std::span<const double> errors) { return summarize_relative_errors(errors).mean; }

double sum_relative_error(std::span<const double> errors) { return summarize_relative_errors(errors).sum; }

double mse_loss(std::span<const CVector> pred, std::span<const CVector> label, std::size_t m_cells) {
  if (pred.empty()) throw InvalidArgument("mse_loss: empty batch");
  if (pred.size() != label.size()) throw InvalidArgument("mse_loss: batch size mismatch");
  if (m_cells == 0) throw InvalidArgument("mse_loss: M must be positive");
  double acc = 0.0;
  for (std::size_t b = 0; b < pred.size(); ++b) {
    if (pred[b].size() != label[b].size()) throw InvalidArgument("mse_loss: sample shape mismatch");
    acc += (pred[b] - label[b]).norm() / static_cast<double>(m_cells);
  }
  return acc / static_cast<double>(pred.size());
}

}  // namespace incscat
