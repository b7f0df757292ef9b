#pragma once

// Domain discretization and the complex array types shared by every module.
//
// Conventions used throughout the library:
//   * time dependence exp(+j*omega*t), so outgoing waves carry exp(-j*k*r);
//   * cells are stored row-major with x fastest: m = j * nx + i;
//   * fields are in V/m with a unit-amplitude incident wave by default.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace incscat {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kMu0 = 1.25663706212e-6;       // H/m

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

class Grid2D {
 public:
  Grid2D(std::size_t nx, std::size_t ny, double dx, double dy, Point2 center = {});

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  Point2 center() const { return center_; }
  std::size_t size() const { return nx_ * ny_; }
  double cell_area() const { return dx_ * dy_; }
  bool square_cells() const { return dx_ == dy_; }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  Point2 cell_center(std::size_t i, std::size_t j) const;
  Point2 cell_center(std::size_t m) const { return cell_center(m % nx_, m / nx_); }

  // Axis-aligned bounding box of the cells (outer edges).
  double xmin() const { return center_.x - 0.5 * static_cast<double>(nx_) * dx_; }
  double xmax() const { return center_.x + 0.5 * static_cast<double>(nx_) * dx_; }
  double ymin() const { return center_.y - 0.5 * static_cast<double>(ny_) * dy_; }
  double ymax() const { return center_.y + 0.5 * static_cast<double>(ny_) * dy_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double dx_;
  double dy_;
  Point2 center_;
};

class PhysicsConfig {
 public:
  explicit PhysicsConfig(double frequency_hz);

  double frequency_hz() const { return frequency_hz_; }
  double k0() const { return k0_; }
  double wavelength() const { return 2.0 * kPi / k0_; }

 private:
  double frequency_hz_;
  double k0_;
};

// Per-cell complex contrast (eps - eps0) / eps0, i.e. the diagonal of the
// contrast matrix.
class ContrastMap {
 public:
  explicit ContrastMap(const Grid2D& grid);  // all zeros
  ContrastMap(const Grid2D& grid, CVector values);

  const Grid2D& grid() const { return grid_; }
  const CVector& values() const { return values_; }
  CVector& values() { return values_; }
  cplx operator[](std::size_t m) const { return values_[static_cast<Eigen::Index>(m)]; }

  bool is_zero() const;
  bool all_finite() const;
  // Re(chi) >= -1 everywhere, i.e. a non-negative relative permittivity.
  bool physically_admissible() const;

 private:
  Grid2D grid_;
  CVector values_;
};

using Mask = std::vector<bool>;

// Known contrast chi_p1 plus the mask of the unknown region p2. chi_p1 must
// vanish on the mask.
class SplitProfile {
 public:
  SplitProfile(ContrastMap chi_p1, Mask mask_p2);

  const Grid2D& grid() const { return chi_p1_.grid(); }
  const ContrastMap& chi_p1() const { return chi_p1_; }
  const Mask& mask_p2() const { return mask_p2_; }
  std::size_t unknown_count() const;

 private:
  ContrastMap chi_p1_;
  Mask mask_p2_;
};

struct IncidentWave {
  double angle_deg = 0.0;  // propagation direction from +x
  cplx amplitude{1.0, 0.0};
};

class ReceiverRing {
 public:
  ReceiverRing(double radius_m, std::size_t count, Point2 center = {}, double start_angle_deg = 0.0);

  double radius() const { return radius_; }
  std::size_t count() const { return count_; }
  Point2 center() const { return center_; }
  double start_angle_deg() const { return start_angle_deg_; }
  double angle_deg(std::size_t s) const;
  Point2 position(std::size_t s) const;

 private:
  double radius_;
  std::size_t count_;
  Point2 center_;
  double start_angle_deg_;
};

enum class FieldDomain { grid, receivers };

struct FieldVector {
  CVector values;
  FieldDomain domain = FieldDomain::grid;

  static FieldVector on_grid(const Grid2D& grid, CVector values);
  static FieldVector on_receivers(const ReceiverRing& ring, CVector values);
  static FieldVector zeros(const Grid2D& grid) {
    return {CVector::Zero(static_cast<Eigen::Index>(grid.size())), FieldDomain::grid};
  }

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

void require_on_grid(const FieldVector& f, const Grid2D& grid, const char* what);

FieldVector incident_field(const Grid2D& grid, const PhysicsConfig& phys, const IncidentWave& wave);

// chi_p1 + chi_p2. Values of chi_p2 outside the mask are dropped; the number
// of dropped nonzero cells is reported through zeroed_off_mask.
ContrastMap compose_full_contrast(const SplitProfile& split, const ContrastMap& chi_p2,
                                  std::size_t* zeroed_off_mask = nullptr);

struct Decomposition {
  SplitProfile split;
  ContrastMap chi_p2;
};

Decomposition decompose_contrast(const ContrastMap& full, const Mask& mask_p2);

// chi restricted to the mask (zero elsewhere).
ContrastMap restrict_to_mask(const ContrastMap& chi, const Mask& mask);

}  // namespace incscat
