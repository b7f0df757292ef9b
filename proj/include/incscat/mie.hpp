#pragma once

#include <span>

#include "incscat/grid.hpp"

namespace incscat {

// Homogeneous lossless dielectric circular cylinder under a TM plane wave.
struct MieCylinder {
  double radius = 0.15;
  double eps_r = 1.5;
  Point2 center{};
};

// Scattered E_z at the given points (all outside the cylinder), by the
// cylindrical-harmonics series truncated once terms stop contributing.
CVector mie_scattered_field(const MieCylinder& cyl, const PhysicsConfig& phys, const IncidentWave& wave,
                            std::span<const Point2> points);

// Highest harmonic order kept for internal size parameter x = k * radius.
int mie_truncation_order(double size_parameter);

// Area fraction of each cell covered by the cylinder (sub-cell sampling).
ContrastMap cylinder_contrast(const Grid2D& grid, const MieCylinder& cyl, int subsamples = 16);

}  // namespace incscat
