#include <cmath>

#include "incscat/error.hpp"
#include "incscat/kernels.hpp"
#include "incscat/special.hpp"

namespace incscat::kernels {

cplx DiscCellKernel::operator()(double distance) const {
  if (distance == 0.0) return self_term;
  return far_factor * hankel2(0, k0 * distance);
}

DiscCellKernel make_disc_kernel(double k0, double cell_area) {
  if (!(k0 > 0.0) || !(cell_area > 0.0)) throw InvalidArgument("disc kernel needs k0 > 0 and a positive cell area");
  DiscCellKernel k;
  k.k0 = k0;
  k.radius = std::sqrt(cell_area / kPi);
  const double ka = k0 * k.radius;
  const cplx j{0.0, 1.0};
  // k0^2 * (-j/4) * (2 pi a / k0) J1(k0 a) H0(k0 rho)
  k.far_factor = -j * (kPi * ka / 2.0) * bessel_j(1, ka);
  // k0^2 * (-j/4) * (2 pi / k0^2) [k0 a H1(k0 a) - 2j/pi]
  k.self_term = -j * (kPi / 2.0) * ka * hankel2(1, ka) - 1.0;
  return k;
}

std::size_t generator_size(std::size_t nx, std::size_t ny) { return (2 * nx - 1) * (2 * ny - 1); }

namespace {

cplx generator_entry(const DiscCellKernel& kernel, const Grid2D& grid, std::size_t k) {
  const std::size_t gx = 2 * grid.nx() - 1;
  const double di = static_cast<double>(k % gx) - static_cast<double>(grid.nx() - 1);
  const double dj = static_cast<double>(k / gx) - static_cast<double>(grid.ny() - 1);
  return kernel(std::hypot(di * grid.dx(), dj * grid.dy()));
}

void check_generator_span(const Grid2D& grid, std::span<cplx> out) {
  if (out.size() != generator_size(grid.nx(), grid.ny())) throw InvalidArgument("generator buffer has the wrong size");
}

void resize_surface(std::span<const Point2> receivers, std::span<const Point2> cells, CMatrix& out) {
  out.resize(static_cast<Eigen::Index>(receivers.size()), static_cast<Eigen::Index>(cells.size()));
}

cplx surface_entry(const DiscCellKernel& kernel, Point2 r, Point2 c) { return kernel(std::hypot(r.x - c.x, r.y - c.y)); }

}  // namespace

void fill_generator_serial(const DiscCellKernel& kernel, const Grid2D& grid, std::span<cplx> out) {
  check_generator_span(grid, out);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = generator_entry(kernel, grid, k);
}

void fill_generator_omp(const DiscCellKernel& kernel, const Grid2D& grid, std::span<cplx> out) {
  check_generator_span(grid, out);
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k)
    out[static_cast<std::size_t>(k)] = generator_entry(kernel, grid, static_cast<std::size_t>(k));
}

void fill_surface_serial(const DiscCellKernel& kernel, std::span<const Point2> receivers,
                         std::span<const Point2> cells, CMatrix& out) {
  resize_surface(receivers, cells, out);
  for (std::size_t m = 0; m < cells.size(); ++m)
    for (std::size_t s = 0; s < receivers.size(); ++s)
      out(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(m)) = surface_entry(kernel, receivers[s], cells[m]);
}

void fill_surface_omp(const DiscCellKernel& kernel, std::span<const Point2> receivers,
                      std::span<const Point2> cells, CMatrix& out) {
  resize_surface(receivers, cells, out);
  const auto ncells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < ncells; ++m)
    for (std::size_t s = 0; s < receivers.size(); ++s)
      out(static_cast<Eigen::Index>(s), m) = surface_entry(kernel, receivers[s], cells[static_cast<std::size_t>(m)]);
}

void bttb_apply_reference(std::span<const cplx> generator, std::size_t nx, std::size_t ny,
                          std::span<const cplx> x, std::span<cplx> y) {
  const std::size_t m_total = nx * ny;
  if (generator.size() != generator_size(nx, ny) || x.size() != m_total || y.size() != m_total)
    throw InvalidArgument("bttb_apply_reference: size mismatch");
  const std::size_t gx = 2 * nx - 1;
  for (std::size_t jm = 0; jm < ny; ++jm) {
    for (std::size_t im = 0; im < nx; ++im) {
      cplx acc{};
      for (std::size_t jn = 0; jn < ny; ++jn) {
        const std::size_t row = (jm + ny - 1 - jn) * gx;
        for (std::size_t in = 0; in < nx; ++in) acc += generator[row + im + nx - 1 - in] * x[jn * nx + in];
      }
      y[jm * nx + im] = acc;
    }
  }
}

}  // namespace incscat::kernels
