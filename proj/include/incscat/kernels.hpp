#pragma once

// Data-parallel kernels behind the Green's operators. Each OpenMP kernel has a
// serial reference kept for tests and for the benchmark target; the pair must
// agree bitwise (assembly) or to rounding (FFT convolution).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

#include "incscat/grid.hpp"

namespace incscat::kernels {

// Cell integral k0^2 * int_cell G(r, r') dr' of the 2-D TM kernel
// G = (-j/4) H0^(2)(k0 |r - r'|), with the cell replaced by the disc of equal
// area (radius a). Outside the disc the integral is exact in closed form via
// the addition theorem; at the disc centre it is the analytic self term.
struct DiscCellKernel {
  double k0 = 0.0;
  double radius = 0.0;
  cplx self_term;
  cplx far_factor;  // multiplies H0^(2)(k0 * distance)

  cplx operator()(double distance) const;
};

DiscCellKernel make_disc_kernel(double k0, double cell_area);

// Toeplitz generator of the volume operator: the entry for cell offset
// (di, dj), di in [-(nx-1), nx-1], dj in [-(ny-1), ny-1], stored at
// (dj + ny - 1) * (2nx - 1) + (di + nx - 1).
std::size_t generator_size(std::size_t nx, std::size_t ny);
void fill_generator_serial(const DiscCellKernel& kernel, const Grid2D& grid, std::span<cplx> out);
void fill_generator_omp(const DiscCellKernel& kernel, const Grid2D& grid, std::span<cplx> out);

// Dense receiver-by-cell matrix, entry (s, m) = kernel(|rho_s - rho_m|).
void fill_surface_serial(const DiscCellKernel& kernel, std::span<const Point2> receivers,
                         std::span<const Point2> cells, CMatrix& out);
void fill_surface_omp(const DiscCellKernel& kernel, std::span<const Point2> receivers,
                      std::span<const Point2> cells, CMatrix& out);

// y = T x for the block-Toeplitz-Toeplitz-block matrix with the given
// generator, by direct O(M^2) summation.
void bttb_apply_reference(std::span<const cplx> generator, std::size_t nx, std::size_t ny,
                          std::span<const cplx> x, std::span<cplx> y);

// Circulant embedding of the BTTB matrix on a (2nx) x (2ny) padded grid,
// applied through zero-padded 2-D FFTs. Immutable after construction; apply()
// allocates its own scratch, so concurrent calls are safe.
class BttbConvolver {
 public:
  BttbConvolver(std::span<const cplx> generator, std::size_t nx, std::size_t ny);
  ~BttbConvolver();
  BttbConvolver(const BttbConvolver&) = delete;
  BttbConvolver& operator=(const BttbConvolver&) = delete;

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  // Row/column 1-D transform passes split across OpenMP threads; rows that
  // are known to be zero (padding) are skipped.
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  // One full 2-D transform on a single thread.
  void apply_serial(std::span<const cplx> x, std::span<cplx> y) const;

 private:
  struct Plans;

  std::size_t nx_;
  std::size_t ny_;
  std::size_t px_;
  std::size_t py_;
  std::size_t col_block_;
  std::unique_ptr<cplx[]> spectrum_;  // FFT of the circulant kernel, scaled by 1/(px*py)
  std::unique_ptr<Plans> plans_;
};

}  // namespace incscat::kernels
