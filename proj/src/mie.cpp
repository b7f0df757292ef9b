#include "incscat/mie.hpp"

#include <cmath>

#include "incscat/error.hpp"
#include "incscat/special.hpp"

namespace incscat {

int mie_truncation_order(double size_parameter) {
  return static_cast<int>(std::ceil(size_parameter + 4.0 * std::cbrt(size_parameter) + 10.0));
}

CVector mie_scattered_field(const MieCylinder& cyl, const PhysicsConfig& phys, const IncidentWave& wave,
                            std::span<const Point2> points) {
  if (!(cyl.radius > 0.0) || !(cyl.eps_r > 0.0)) throw InvalidArgument("cylinder needs positive radius and eps_r");
  const double k = phys.k0();
  const double k1 = k * std::sqrt(cyl.eps_r);
  const double ka = k * cyl.radius;
  const double k1a = k1 * cyl.radius;
  const int order = mie_truncation_order(std::max(ka, k1a));

  // Outside: sum_n (-j)^n [J_n(k rho) + a_n H_n(k rho)] e^{j n (phi - theta)};
  // E_z and dE_z/drho continuous at rho = radius.
  std::vector<cplx> coef(static_cast<std::size_t>(2 * order + 1));
  for (int n = -order; n <= order; ++n) {
    const double jn_in = bessel_j(n, k1a);
    const double jnp_in = bessel_j_prime(n, k1a);
    const double jn_out = bessel_j(n, ka);
    const double jnp_out = bessel_j_prime(n, ka);
    const cplx num = k1 * jnp_in * jn_out - k * jn_in * jnp_out;
    const cplx den = k * jn_in * hankel2_prime(n, ka) - k1 * jnp_in * hankel2(n, ka);
    coef[static_cast<std::size_t>(n + order)] = num / den;
  }

  const double theta = wave.angle_deg * kPi / 180.0;
  const cplx phase_at_center =
      wave.amplitude * std::polar(1.0, -k * (cyl.center.x * std::cos(theta) + cyl.center.y * std::sin(theta)));
  const cplx minus_j{0.0, -1.0};

  CVector out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double rx = points[p].x - cyl.center.x;
    const double ry = points[p].y - cyl.center.y;
    const double rho = std::hypot(rx, ry);
    if (rho <= cyl.radius) throw InvalidArgument("Mie observation point inside the cylinder");
    const double phi = std::atan2(ry, rx);
    cplx sum{};
    for (int n = -order; n <= order; ++n) {
      const cplx jpow = std::pow(minus_j, n);
      sum += jpow * coef[static_cast<std::size_t>(n + order)] * hankel2(n, k * rho) *
             std::polar(1.0, static_cast<double>(n) * (phi - theta));
    }
    out[static_cast<Eigen::Index>(p)] = phase_at_center * sum;
  }
  return out;
}

ContrastMap cylinder_contrast(const Grid2D& grid, const MieCylinder& cyl, int subsamples) {
  if (subsamples < 1) throw InvalidArgument("cylinder_contrast: subsamples must be positive");
  CVector chi(static_cast<Eigen::Index>(grid.size()));
  const double r2 = cyl.radius * cyl.radius;
  const double inv = 1.0 / static_cast<double>(subsamples);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Point2 c = grid.cell_center(m);
    int inside = 0;
    for (int sy = 0; sy < subsamples; ++sy)
      for (int sx = 0; sx < subsamples; ++sx) {
        const double x = c.x + ((sx + 0.5) * inv - 0.5) * grid.dx() - cyl.center.x;
        const double y = c.y + ((sy + 0.5) * inv - 0.5) * grid.dy() - cyl.center.y;
        inside += (x * x + y * y <= r2) ? 1 : 0;
      }
    chi[static_cast<Eigen::Index>(m)] = (cyl.eps_r - 1.0) * static_cast<double>(inside) * inv * inv;
  }
  return ContrastMap(grid, std::move(chi));
}

}  // namespace incscat
