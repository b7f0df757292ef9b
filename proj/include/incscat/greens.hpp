#pragma once

// Discretized Green's operators of the 2-D TM problem.
//
// With pulse basis and point testing the state and data equations read
//   E_tot = E_inc + G_D * diag(chi) * E_tot      (cells -> cells)
//   E_sca = G_S * diag(chi) * E_tot              (cells -> receivers)
// where both matrices already carry k0^2 and the cell quadrature.

#include <memory>
#include <vector>

#include "incscat/grid.hpp"
#include "incscat/kernels.hpp"

namespace incscat {

class GreensVolumeOperator {
 public:
  GreensVolumeOperator(const Grid2D& grid, const PhysicsConfig& phys);

  const Grid2D& grid() const { return grid_; }
  const PhysicsConfig& phys() const { return phys_; }
  cplx self_term() const { return kernel_.self_term; }
  const kernels::DiscCellKernel& kernel() const { return kernel_; }

  // Matrix entry for cells separated by (di, dj) cells.
  cplx offset_entry(std::ptrdiff_t di, std::ptrdiff_t dj) const;
  cplx entry(std::size_t m, std::size_t n) const;
  const std::vector<cplx>& generator() const { return generator_; }

  // y = G_D x via the FFT convolver. Deterministic for a fixed build.
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  CVector apply(const CVector& x) const;

 private:
  Grid2D grid_;
  PhysicsConfig phys_;
  kernels::DiscCellKernel kernel_;
  std::vector<cplx> generator_;
  std::shared_ptr<const kernels::BttbConvolver> convolver_;
};

// Throws UnsupportedGrid for non-square cells.
GreensVolumeOperator build_volume_operator(const Grid2D& grid, const PhysicsConfig& phys);

FieldVector apply_volume(const GreensVolumeOperator& op, const FieldVector& x);

// Dense G_D assembled entry by entry from cell-centre distances.
CMatrix assemble_dense_volume(const Grid2D& grid, const PhysicsConfig& phys);

class GreensSurfaceMatrix {
 public:
  GreensSurfaceMatrix(const Grid2D& grid, const ReceiverRing& ring, const PhysicsConfig& phys);

  const Grid2D& grid() const { return grid_; }
  const ReceiverRing& ring() const { return ring_; }
  const PhysicsConfig& phys() const { return phys_; }
  const CMatrix& entries() const { return entries_; }

 private:
  Grid2D grid_;
  ReceiverRing ring_;
  PhysicsConfig phys_;
  CMatrix entries_;
};

// Throws GeometryError when a receiver lies inside the domain's bounding box.
GreensSurfaceMatrix build_surface_matrix(const Grid2D& grid, const ReceiverRing& ring, const PhysicsConfig& phys);

// Moore-Penrose pseudo-inverse by SVD; singular values below
// rel_threshold * sigma_max are dropped.
CMatrix pseudo_inverse_surface(const GreensSurfaceMatrix& mat, double rel_threshold = 1e-12);
CMatrix pseudo_inverse(const CMatrix& a, double rel_threshold = 1e-12);

}  // namespace incscat
