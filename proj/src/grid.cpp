#include "incscat/grid.hpp"

#include <cmath>
#include <string>

#include "incscat/error.hpp"

namespace incscat {

Grid2D::Grid2D(std::size_t nx, std::size_t ny, double dx, double dy, Point2 center)
    : nx_(nx), ny_(ny), dx_(dx), dy_(dy), center_(center) {
  if (nx == 0 || ny == 0) throw InvalidArgument("grid needs at least one cell per axis");
  if (!(dx > 0.0) || !(dy > 0.0)) throw InvalidArgument("grid cell size must be positive");
}

Point2 Grid2D::cell_center(std::size_t i, std::size_t j) const {
  const double ox = (static_cast<double>(i) - 0.5 * static_cast<double>(nx_ - 1)) * dx_;
  const double oy = (static_cast<double>(j) - 0.5 * static_cast<double>(ny_ - 1)) * dy_;
  return {center_.x + ox, center_.y + oy};
}

PhysicsConfig::PhysicsConfig(double frequency_hz) : frequency_hz_(frequency_hz) {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz))
    throw InvalidArgument("frequency must be positive and finite");
  k0_ = 2.0 * kPi * frequency_hz * std::sqrt(kEpsilon0 * kMu0);
}

ContrastMap::ContrastMap(const Grid2D& grid)
    : grid_(grid), values_(CVector::Zero(static_cast<Eigen::Index>(grid.size()))) {}

ContrastMap::ContrastMap(const Grid2D& grid, CVector values) : grid_(grid), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid.size())
    throw InvalidArgument("contrast length " + std::to_string(values_.size()) + " does not match grid size " +
                          std::to_string(grid.size()));
}

bool ContrastMap::is_zero() const {
  for (Eigen::Index m = 0; m < values_.size(); ++m)
    if (values_[m] != cplx{}) return false;
  return true;
}

bool ContrastMap::all_finite() const {
  for (Eigen::Index m = 0; m < values_.size(); ++m)
    if (!std::isfinite(values_[m].real()) || !std::isfinite(values_[m].imag())) return false;
  return true;
}

bool ContrastMap::physically_admissible() const {
  for (Eigen::Index m = 0; m < values_.size(); ++m)
    if (values_[m].real() < -1.0) return false;
  return true;
}

SplitProfile::SplitProfile(ContrastMap chi_p1, Mask mask_p2)
    : chi_p1_(std::move(chi_p1)), mask_p2_(std::move(mask_p2)) {
  if (mask_p2_.size() != chi_p1_.grid().size()) throw InvalidArgument("mask length does not match grid size");
  for (std::size_t m = 0; m < mask_p2_.size(); ++m)
    if (mask_p2_[m] && chi_p1_[m] != cplx{})
      throw InvalidArgument("known contrast must vanish inside the unknown region (cell " + std::to_string(m) + ")");
}

std::size_t SplitProfile::unknown_count() const {
  std::size_t n = 0;
  for (bool b : mask_p2_) n += b ? 1 : 0;
  return n;
}

ReceiverRing::ReceiverRing(double radius_m, std::size_t count, Point2 center, double start_angle_deg)
    : radius_(radius_m), count_(count), center_(center), start_angle_deg_(start_angle_deg) {
  if (!(radius_m > 0.0)) throw InvalidArgument("receiver ring radius must be positive");
  if (count == 0) throw InvalidArgument("receiver ring needs at least one receiver");
}

double ReceiverRing::angle_deg(std::size_t s) const {
  return start_angle_deg_ + 360.0 * static_cast<double>(s) / static_cast<double>(count_);
}

Point2 ReceiverRing::position(std::size_t s) const {
  const double phi = angle_deg(s) * kPi / 180.0;
  return {center_.x + radius_ * std::cos(phi), center_.y + radius_ * std::sin(phi)};
}

FieldVector FieldVector::on_grid(const Grid2D& grid, CVector values) {
  if (static_cast<std::size_t>(values.size()) != grid.size())
    throw InvalidArgument("grid field length does not match grid size");
  return {std::move(values), FieldDomain::grid};
}

FieldVector FieldVector::on_receivers(const ReceiverRing& ring, CVector values) {
  if (static_cast<std::size_t>(values.size()) != ring.count())
    throw InvalidArgument("receiver field length does not match receiver count");
  return {std::move(values), FieldDomain::receivers};
}

void require_on_grid(const FieldVector& f, const Grid2D& grid, const char* what) {
  if (f.domain != FieldDomain::grid || f.size() != grid.size())
    throw InvalidArgument(std::string(what) + ": expected a grid field of length " + std::to_string(grid.size()));
}

FieldVector incident_field(const Grid2D& grid, const PhysicsConfig& phys, const IncidentWave& wave) {
  const double theta = wave.angle_deg * kPi / 180.0;
  const double kx = phys.k0() * std::cos(theta);
  const double ky = phys.k0() * std::sin(theta);
  CVector e(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const Point2 r = grid.cell_center(m);
    e[static_cast<Eigen::Index>(m)] = wave.amplitude * std::polar(1.0, -(kx * r.x + ky * r.y));
  }
  return {std::move(e), FieldDomain::grid};
}

ContrastMap compose_full_contrast(const SplitProfile& split, const ContrastMap& chi_p2,
                                  std::size_t* zeroed_off_mask) {
  if (!(chi_p2.grid() == split.grid())) throw InvalidArgument("compose_full_contrast: grid mismatch");
  CVector full = split.chi_p1().values();
  std::size_t zeroed = 0;
  const auto& mask = split.mask_p2();
  for (std::size_t m = 0; m < mask.size(); ++m) {
    // chi_p1 vanishes on the mask, so assignment is the sum and keeps the
    // round trip with decompose_contrast bitwise (signed zeros included).
    if (mask[m])
      full[static_cast<Eigen::Index>(m)] = chi_p2[m];
    else if (chi_p2[m] != cplx{})
      ++zeroed;
  }
  if (zeroed_off_mask) *zeroed_off_mask = zeroed;
  return ContrastMap(split.grid(), std::move(full));
}

Decomposition decompose_contrast(const ContrastMap& full, const Mask& mask_p2) {
  if (mask_p2.size() != full.grid().size()) throw InvalidArgument("decompose_contrast: mask length mismatch");
  CVector known = full.values();
  CVector unknown = CVector::Zero(known.size());
  for (std::size_t m = 0; m < mask_p2.size(); ++m) {
    if (!mask_p2[m]) continue;
    const auto k = static_cast<Eigen::Index>(m);
    unknown[k] = known[k];
    known[k] = cplx{};
  }
  return {SplitProfile(ContrastMap(full.grid(), std::move(known)), mask_p2),
          ContrastMap(full.grid(), std::move(unknown))};
}

ContrastMap restrict_to_mask(const ContrastMap& chi, const Mask& mask) {
  if (mask.size() != chi.grid().size()) throw InvalidArgument("restrict_to_mask: mask length mismatch");
  CVector v = chi.values();
  for (std::size_t m = 0; m < mask.size(); ++m)
    if (!mask[m]) v[static_cast<Eigen::Index>(m)] = cplx{};
  return ContrastMap(chi.grid(), std::move(v));
}

}  // namespace incscat
