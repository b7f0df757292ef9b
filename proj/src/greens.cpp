#include "incscat/greens.hpp"

#include <cmath>
#include <cstdlib>

#include <Eigen/SVD>

#include "incscat/error.hpp"

namespace incscat {

namespace {

const Grid2D& require_square(const Grid2D& grid) {
  if (!grid.square_cells()) throw UnsupportedGrid("volume operator requires square cells (dx == dy)");
  return grid;
}

}  // namespace

GreensVolumeOperator::GreensVolumeOperator(const Grid2D& grid, const PhysicsConfig& phys)
    : grid_(require_square(grid)),
      phys_(phys),
      kernel_(kernels::make_disc_kernel(phys.k0(), grid.cell_area())),
      generator_(kernels::generator_size(grid.nx(), grid.ny())) {
  kernels::fill_generator_omp(kernel_, grid_, generator_);
  convolver_ = std::make_shared<const kernels::BttbConvolver>(generator_, grid_.nx(), grid_.ny());
}

cplx GreensVolumeOperator::offset_entry(std::ptrdiff_t di, std::ptrdiff_t dj) const {
  const auto nx = static_cast<std::ptrdiff_t>(grid_.nx());
  const auto ny = static_cast<std::ptrdiff_t>(grid_.ny());
  if (std::abs(di) >= nx || std::abs(dj) >= ny) throw InvalidArgument("offset outside the grid");
  const auto k = static_cast<std::size_t>((dj + ny - 1) * (2 * nx - 1) + (di + nx - 1));
  return generator_[k];
}

cplx GreensVolumeOperator::entry(std::size_t m, std::size_t n) const {
  const auto nx = grid_.nx();
  const auto di = static_cast<std::ptrdiff_t>(m % nx) - static_cast<std::ptrdiff_t>(n % nx);
  const auto dj = static_cast<std::ptrdiff_t>(m / nx) - static_cast<std::ptrdiff_t>(n / nx);
  return offset_entry(di, dj);
}

void GreensVolumeOperator::apply(std::span<const cplx> x, std::span<cplx> y) const { convolver_->apply(x, y); }

CVector GreensVolumeOperator::apply(const CVector& x) const {
  if (static_cast<std::size_t>(x.size()) != grid_.size()) throw InvalidArgument("apply_volume: dimension mismatch");
  CVector y(x.size());
  convolver_->apply({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), static_cast<std::size_t>(y.size())});
  return y;
}

GreensVolumeOperator build_volume_operator(const Grid2D& grid, const PhysicsConfig& phys) {
  return GreensVolumeOperator(grid, phys);
}

FieldVector apply_volume(const GreensVolumeOperator& op, const FieldVector& x) {
  require_on_grid(x, op.grid(), "apply_volume");
  return {op.apply(x.values), FieldDomain::grid};
}

CMatrix assemble_dense_volume(const Grid2D& grid, const PhysicsConfig& phys) {
  require_square(grid);
  const auto kernel = kernels::make_disc_kernel(phys.k0(), grid.cell_area());
  const auto m_total = static_cast<Eigen::Index>(grid.size());
  CMatrix g(m_total, m_total);
  for (Eigen::Index n = 0; n < m_total; ++n) {
    const Point2 rn = grid.cell_center(static_cast<std::size_t>(n));
    for (Eigen::Index m = 0; m < m_total; ++m) {
      const Point2 rm = grid.cell_center(static_cast<std::size_t>(m));
      g(m, n) = (m == n) ? kernel.self_term : kernel(std::hypot(rm.x - rn.x, rm.y - rn.y));
    }
  }
  return g;
}

GreensSurfaceMatrix::GreensSurfaceMatrix(const Grid2D& grid, const ReceiverRing& ring, const PhysicsConfig& phys)
    : grid_(grid), ring_(ring), phys_(phys) {
  std::vector<Point2> receivers(ring.count());
  for (std::size_t s = 0; s < ring.count(); ++s) {
    receivers[s] = ring.position(s);
    const Point2 r = receivers[s];
    if (r.x >= grid.xmin() && r.x <= grid.xmax() && r.y >= grid.ymin() && r.y <= grid.ymax())
      throw GeometryError("receiver " + std::to_string(s) + " lies inside the computational domain");
  }
  std::vector<Point2> cells(grid.size());
  for (std::size_t m = 0; m < grid.size(); ++m) cells[m] = grid.cell_center(m);
  const auto kernel = kernels::make_disc_kernel(phys.k0(), grid.cell_area());
  kernels::fill_surface_omp(kernel, receivers, cells, entries_);
}

GreensSurfaceMatrix build_surface_matrix(const Grid2D& grid, const ReceiverRing& ring, const PhysicsConfig& phys) {
  return GreensSurfaceMatrix(grid, ring, phys);
}

CMatrix pseudo_inverse(const CMatrix& a, double rel_threshold) {
  if (!(rel_threshold > 0.0 && rel_threshold < 1.0)) throw InvalidArgument("pseudo-inverse threshold must lie in (0, 1)");
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("pseudo-inverse of an all-zero matrix");
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double cutoff = rel_threshold * sigma[0];
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] >= cutoff) inv[i] = 1.0 / sigma[i];
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

CMatrix pseudo_inverse_surface(const GreensSurfaceMatrix& mat, double rel_threshold) {
  return pseudo_inverse(mat.entries(), rel_threshold);
}

}  // namespace incscat
