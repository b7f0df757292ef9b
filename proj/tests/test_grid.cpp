#include <doctest.h>

#include <cmath>
#include <cstring>

#include "incscat/error.hpp"
#include "incscat/grid.hpp"
#include "support.hpp"

using namespace incscat;

TEST_CASE("grid rejects degenerate dimensions and spacings") {
  CHECK_THROWS_AS(Grid2D(0, 4, 0.01, 0.01), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(4, 0, 0.01, 0.01), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(4, 4, 0.0, 0.01), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(4, 4, 0.01, -1.0), InvalidArgument);
  CHECK_THROWS_AS(Grid2D(4, 4, NAN, 0.01), InvalidArgument);
}

TEST_CASE("cell centres are symmetric about the grid centre") {
  for (auto [nx, ny] : {std::pair<std::size_t, std::size_t>{1, 1}, {4, 3}, {7, 8}, {64, 64}}) {
    const Point2 c{0.3, -1.2};
    const Grid2D g(nx, ny, 0.01, 0.02, c);
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Point2 p = g.cell_center(m);
      const Point2 q = g.cell_center(g.size() - 1 - m);  // point reflection through the centre
      CHECK(p.x + q.x == doctest::Approx(2 * c.x).epsilon(1e-12));
      CHECK(p.y + q.y == doctest::Approx(2 * c.y).epsilon(1e-12));
      sx += p.x;
      sy += p.y;
    }
    CHECK(sx / g.size() == doctest::Approx(c.x).epsilon(1e-12));
    CHECK(sy / g.size() == doctest::Approx(c.y).epsilon(1e-12));
    CHECK(g.xmax() - g.xmin() == doctest::Approx(nx * 0.01));
  }
}

TEST_CASE("row-major ordering with x fastest") {
  const Grid2D g(5, 3, 0.1, 0.1);
  CHECK(g.index(0, 0) == 0);
  CHECK(g.index(4, 0) == 4);
  CHECK(g.index(0, 1) == 5);
  CHECK(g.cell_center(g.index(2, 1)).x == doctest::Approx(0.0));
  CHECK(g.cell_center(g.index(2, 1)).y == doctest::Approx(0.0));
  CHECK(g.cell_center(g.index(4, 2)).x == doctest::Approx(0.2));
  CHECK(g.cell_center(g.index(4, 2)).y == doctest::Approx(0.1));
}

TEST_CASE("wavenumber from eps0 and mu0") {
  // Speed of light is exact by definition; eps0 and mu0 are CODATA values.
  const PhysicsConfig p(1e9);
  CHECK(p.k0() == doctest::Approx(2 * kPi * 1e9 / 299792458.0).epsilon(1e-9));
  CHECK(p.wavelength() == doctest::Approx(0.299792458).epsilon(1e-9));
  CHECK_THROWS_AS(PhysicsConfig(0.0), InvalidArgument);
  CHECK_THROWS_AS(PhysicsConfig(-1.0), InvalidArgument);
}

TEST_CASE("incident plane wave: unit modulus and phase along the propagation direction") {
  const Grid2D g(6, 4, 0.05, 0.05);
  const PhysicsConfig p(1e9);
  for (double ang : {0.0, 30.0, 90.0, 225.0}) {
    const FieldVector e = incident_field(g, p, {ang, {1.0, 0.0}});
    const double th = ang * kPi / 180.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
      const Point2 r = g.cell_center(m);
      const cplx expect = std::polar(1.0, -p.k0() * (r.x * std::cos(th) + r.y * std::sin(th)));
      CHECK(std::abs(e.values[m] - expect) < 1e-13);
    }
  }
  const FieldVector e2 = incident_field(g, p, {0.0, {0.0, 2.0}});
  CHECK(std::abs(e2.values[0]) == doctest::Approx(2.0));
}

TEST_CASE("contrast map predicates") {
  const Grid2D g(3, 3, 0.1, 0.1);
  ContrastMap c(g);
  CHECK(c.is_zero());
  CHECK(c.physically_admissible());
  c.values()[4] = {-1.5, 0.0};
  CHECK_FALSE(c.physically_admissible());
  c.values()[4] = {NAN, 0.0};
  CHECK_FALSE(c.all_finite());
  CHECK_THROWS_AS(ContrastMap(g, CVector::Zero(5)), InvalidArgument);
}

TEST_CASE("split profile requires the known contrast to vanish on the mask") {
  const Grid2D g(3, 3, 0.1, 0.1);
  CVector x1 = CVector::Zero(9);
  x1[0] = 0.5;
  Mask mask(9, false);
  mask[0] = true;
  CHECK_THROWS_AS(SplitProfile(ContrastMap(g, x1), mask), InvalidArgument);
  CHECK_THROWS_AS(SplitProfile(ContrastMap(g, x1), Mask(4, false)), InvalidArgument);
  mask[0] = false;
  mask[1] = mask[2] = true;
  const SplitProfile s(ContrastMap(g, x1), mask);
  CHECK(s.unknown_count() == 2);
}

TEST_CASE("compose and decompose round trip bitwise") {
  const Grid2D g(8, 8, 0.01, 0.01);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    CVector full = testing::random_cvector(g.size(), seed);
    Mask mask(g.size());
    for (std::size_t m = 0; m < g.size(); ++m) {
      mask[m] = uniform01(rng) < 0.3;
      if (uniform01(rng) < 0.2) full[m] = 0.0;
      if (uniform01(rng) < 0.05) full[m] = {-0.0, 0.25};
    }
    const ContrastMap chi(g, full);
    const Decomposition d = decompose_contrast(chi, mask);
    const ContrastMap back = compose_full_contrast(d.split, d.chi_p2);
    CHECK(std::memcmp(back.values().data(), full.data(), sizeof(cplx) * g.size()) == 0);
    for (std::size_t m = 0; m < g.size(); ++m) {
      if (mask[m]) CHECK(d.split.chi_p1()[m] == cplx{});
      else CHECK(d.chi_p2[m] == cplx{});
    }
  }
}

TEST_CASE("compose drops and counts chi_p2 values outside the mask") {
  const Grid2D g(2, 2, 0.1, 0.1);
  Mask mask{true, false, false, false};
  const SplitProfile s(ContrastMap(g), mask);
  CVector x2(4);
  x2 << 1.0, 2.0, 0.0, 3.0;
  std::size_t dropped = 0;
  const ContrastMap full = compose_full_contrast(s, ContrastMap(g, x2), &dropped);
  CHECK(dropped == 2);
  CHECK(full[0] == cplx{1.0});
  CHECK(full[1] == cplx{});
  CHECK(full[3] == cplx{});
}

TEST_CASE("receiver ring geometry") {
  const ReceiverRing r(5.0, 32, {1.0, 2.0});
  for (std::size_t s = 0; s < r.count(); ++s) {
    const Point2 p = r.position(s);
    CHECK(std::hypot(p.x - 1.0, p.y - 2.0) == doctest::Approx(5.0));
    CHECK(r.angle_deg(s) == doctest::Approx(360.0 * s / 32.0));
  }
  CHECK_THROWS_AS(ReceiverRing(0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(ReceiverRing(1.0, 0), InvalidArgument);
}

TEST_CASE("field vectors are checked against their domain") {
  const Grid2D g(4, 4, 0.1, 0.1);
  const ReceiverRing ring(5.0, 8);
  CHECK_THROWS_AS(FieldVector::on_grid(g, CVector::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(FieldVector::on_receivers(ring, CVector::Zero(16)), InvalidArgument);
  CHECK_THROWS_AS(require_on_grid(FieldVector::on_receivers(ring, CVector::Zero(8)), g, "t"), InvalidArgument);
  CHECK_NOTHROW(require_on_grid(FieldVector::zeros(g), g, "t"));
}
