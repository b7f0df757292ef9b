#include <algorithm>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "incscat/error.hpp"
#include "incscat/kernels.hpp"

namespace incscat::kernels {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

constexpr unsigned kPlanFlags = FFTW_ESTIMATE | FFTW_UNALIGNED;

}  // namespace

struct BttbConvolver::Plans {
  fftw_plan row_fwd = nullptr;  // one row of length px
  fftw_plan row_bwd = nullptr;
  fftw_plan col_fwd = nullptr;  // col_block columns of length py, stride px
  fftw_plan col_bwd = nullptr;
  fftw_plan full_fwd = nullptr;  // whole py x px array
  fftw_plan full_bwd = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    for (fftw_plan p : {row_fwd, row_bwd, col_fwd, col_bwd, full_fwd, full_bwd})
      if (p) fftw_destroy_plan(p);
  }
};

BttbConvolver::BttbConvolver(std::span<const cplx> generator, std::size_t nx, std::size_t ny)
    : nx_(nx), ny_(ny), px_(2 * nx), py_(2 * ny), plans_(std::make_unique<Plans>()) {
  if (nx == 0 || ny == 0 || generator.size() != generator_size(nx, ny))
    throw InvalidArgument("BttbConvolver: generator size does not match grid");

  col_block_ = 1;
  for (std::size_t w : {8u, 4u, 2u})
    if (px_ % w == 0) {
      col_block_ = w;
      break;
    }

  const std::size_t total = px_ * py_;
  std::vector<cplx> scratch(total);
  {
    std::lock_guard lock(planner_mutex());
    const int px = static_cast<int>(px_);
    const int py = static_cast<int>(py_);
    const int block = static_cast<int>(col_block_);
    fftw_complex* buf = as_fftw(scratch.data());
    plans_->row_fwd = fftw_plan_dft_1d(px, buf, buf, FFTW_FORWARD, kPlanFlags);
    plans_->row_bwd = fftw_plan_dft_1d(px, buf, buf, FFTW_BACKWARD, kPlanFlags);
    plans_->col_fwd = fftw_plan_many_dft(1, &py, block, buf, nullptr, px, 1, buf, nullptr, px, 1, FFTW_FORWARD, kPlanFlags);
    plans_->col_bwd = fftw_plan_many_dft(1, &py, block, buf, nullptr, px, 1, buf, nullptr, px, 1, FFTW_BACKWARD, kPlanFlags);
    plans_->full_fwd = fftw_plan_dft_2d(py, px, buf, buf, FFTW_FORWARD, kPlanFlags);
    plans_->full_bwd = fftw_plan_dft_2d(py, px, buf, buf, FFTW_BACKWARD, kPlanFlags);
  }
  if (!plans_->row_fwd || !plans_->row_bwd || !plans_->col_fwd || !plans_->col_bwd || !plans_->full_fwd ||
      !plans_->full_bwd)
    throw Error("FFTW failed to create plans");

  // Circulant embedding: padded index p maps to offset p (p < nx) or p - px
  // (p > nx); the column p == nx never meets a nonzero input and stays zero.
  const std::size_t gx = 2 * nx - 1;
  std::fill(scratch.begin(), scratch.end(), cplx{});
  for (std::size_t q = 0; q < py_; ++q) {
    if (q == ny_) continue;
    const std::ptrdiff_t dj = q < ny_ ? static_cast<std::ptrdiff_t>(q) : static_cast<std::ptrdiff_t>(q) - static_cast<std::ptrdiff_t>(py_);
    for (std::size_t p = 0; p < px_; ++p) {
      if (p == nx_) continue;
      const std::ptrdiff_t di = p < nx_ ? static_cast<std::ptrdiff_t>(p) : static_cast<std::ptrdiff_t>(p) - static_cast<std::ptrdiff_t>(px_);
      const auto gk = static_cast<std::size_t>(dj + static_cast<std::ptrdiff_t>(ny - 1)) * gx +
                      static_cast<std::size_t>(di + static_cast<std::ptrdiff_t>(nx - 1));
      scratch[q * px_ + p] = generator[gk];
    }
  }
  fftw_execute_dft(plans_->full_fwd, as_fftw(scratch.data()), as_fftw(scratch.data()));
  spectrum_ = std::make_unique<cplx[]>(total);
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < total; ++k) spectrum_[k] = scratch[k] * scale;
}

BttbConvolver::~BttbConvolver() = default;

void BttbConvolver::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t m_total = nx_ * ny_;
  if (x.size() != m_total || y.size() != m_total) throw InvalidArgument("BttbConvolver::apply: size mismatch");

  const std::size_t total = px_ * py_;
  std::vector<cplx> buf(total);  // zero-initialized padding
  cplx* b = buf.data();
  const auto ny = static_cast<std::ptrdiff_t>(ny_);
  const auto blocks = static_cast<std::ptrdiff_t>(px_ / col_block_);
  const auto n_total = static_cast<std::ptrdiff_t>(total);

#pragma omp parallel
  {
    // Forward: rows j >= ny are zero padding, transform only the data rows.
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < ny; ++j) {
      cplx* row = b + static_cast<std::size_t>(j) * px_;
      std::copy_n(x.data() + static_cast<std::size_t>(j) * nx_, nx_, row);
      fftw_execute_dft(plans_->row_fwd, as_fftw(row), as_fftw(row));
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < blocks; ++c) {
      cplx* col = b + static_cast<std::size_t>(c) * col_block_;
      fftw_execute_dft(plans_->col_fwd, as_fftw(col), as_fftw(col));
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t k = 0; k < n_total; ++k) b[k] *= spectrum_[static_cast<std::size_t>(k)];
#pragma omp for schedule(static)
    for (std::ptrdiff_t c = 0; c < blocks; ++c) {
      cplx* col = b + static_cast<std::size_t>(c) * col_block_;
      fftw_execute_dft(plans_->col_bwd, as_fftw(col), as_fftw(col));
    }
    // Backward: only rows j < ny survive the crop.
#pragma omp for schedule(static)
    for (std::ptrdiff_t j = 0; j < ny; ++j) {
      cplx* row = b + static_cast<std::size_t>(j) * px_;
      fftw_execute_dft(plans_->row_bwd, as_fftw(row), as_fftw(row));
      std::copy_n(row, nx_, y.data() + static_cast<std::size_t>(j) * nx_);
    }
  }
}

void BttbConvolver::apply_serial(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t m_total = nx_ * ny_;
  if (x.size() != m_total || y.size() != m_total) throw InvalidArgument("BttbConvolver::apply_serial: size mismatch");
  const std::size_t total = px_ * py_;
  std::vector<cplx> buf(total);
  for (std::size_t j = 0; j < ny_; ++j) std::copy_n(x.data() + j * nx_, nx_, buf.data() + j * px_);
  fftw_execute_dft(plans_->full_fwd, as_fftw(buf.data()), as_fftw(buf.data()));
  for (std::size_t k = 0; k < total; ++k) buf[k] *= spectrum_[k];
  fftw_execute_dft(plans_->full_bwd, as_fftw(buf.data()), as_fftw(buf.data()));
  for (std::size_t j = 0; j < ny_; ++j) std::copy_n(buf.data() + j * px_, nx_, y.data() + j * nx_);
}

}  // namespace incscat::kernels
