#include <doctest.h>

#include "geometry.hpp"
#include "num.hpp"

#include <cmath>
#include <numbers>

using namespace pharm;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_SUITE("geometry") {

TEST_CASE("euclidean metric") {
  auto g = make_euclidean(1.0);
  CHECK(g.phi(1.0) == 1.0);
  CHECK(g.phi(37.5) == 1.0);
  CHECK(g.dphi(2.0) == 0.0);
  CHECK_FALSE(g.singular_at_rmin());
  CHECK(g.adm_mass.has_value());
  CHECK(*g.adm_mass == 0.0);
  auto s = sphere_geometry(g, 3.0);
  CHECK(std::fabs(s.area - 36.0 * kPi) < 1e-13);
  CHECK(std::fabs(s.H - 2.0 / 3.0) < 1e-15);
  CHECK(std::fabs(s.K - 1.0 / 9.0) < 1e-15);
  CHECK(scalar_curvature(g, 5.0) == 0.0);
  CHECK(hawking_mass_sphere(g, 5.0) == 0.0);
}

TEST_CASE("schwarzschild metric at the horizon and outside") {
  auto g = make_schwarzschild(1.0, 2.0);
  CHECK(g.singular_at_rmin());
  CHECK(std::isinf(g.phi(2.0)));
  CHECK(std::fabs(g.phi(4.0) - std::sqrt(2.0)) < 1e-15);
  // dphi = -m phi^3 / r^2
  double r = 3.0;
  double phi = g.phi(r);
  CHECK(std::fabs(g.dphi(r) + phi * phi * phi / (r * r)) < 1e-14);
  // horizon sphere: H = 0 (phi = inf propagates through IEEE division)
  auto s = sphere_geometry(g, 2.0);
  CHECK(s.H == 0.0);
  CHECK(std::fabs(s.area - 16.0 * kPi) < 1e-13);
  CHECK(std::fabs(hawking_mass_sphere(g, 2.0) - 1.0) < 1e-15);
  // vacuum: scalar curvature vanishes at many radii
  for (double rr : log_grid(2.0 + 1e-6, 1e4, 60))
    CHECK(std::fabs(scalar_curvature(g, rr)) < 1e-10);
  CHECK(std::fabs(hawking_mass_sphere(g, 50.0) - 1.0) < 1e-14);
}

TEST_CASE("offset evaluation near the horizon avoids cancellation") {
  auto g = make_schwarzschild(1.0, 2.0);
  double ds = 1e-13;
  double ph = g.phi_offset(2.0, ds);
  // phi = sqrt(r/(r-2m)) with r-2m = ds known exactly
  CHECK(std::fabs(ph - std::sqrt(2.0 / ds)) < 1e-3 * ph);
  CHECK(std::isfinite(ph));
  // euclidean offset is trivial
  auto e = make_euclidean(1.0);
  CHECK(e.phi_offset(1.0, 1e-14) == 1.0);
}

TEST_CASE("adm mass estimate converges on schwarzschild") {
  auto g = make_schwarzschild(1.0, 2.0);
  // r(1 - 1/phi) -> m with O(1/r) error
  CHECK(std::fabs(adm_mass_estimate(g, 100.0) - 1.0050506338833465839) < 1e-12);
  CHECK(std::fabs(adm_mass_estimate(g, 1e4) - 1.0000500050006250875) < 1e-12);
  CHECK_THROWS(adm_mass_estimate(g, 3.0));  // too close to the boundary
}

TEST_CASE("profile metric interpolates and extends with the stated tail") {
  // phi = 1 + 1/r sampled on [1, 50]; tail sigma = 1 continues it exactly
  auto rs = log_grid(1.0, 50.0, 200);
  std::vector<double> ph;
  for (double r : rs) ph.push_back(1.0 + 1.0 / r);
  auto g = make_profile(rs, ph, 1.0);
  CHECK(g.kind == MetricKind::profile);
  CHECK_FALSE(g.singular_at_rmin());
  CHECK_FALSE(g.adm_mass.has_value());
  for (double r : {1.0, 1.7, 4.3, 20.0, 50.0, 120.0, 5000.0})
    CHECK(std::fabs(g.phi(r) - (1.0 + 1.0 / r)) < 2e-7);
  // derivative from the interpolant tracks -1/r^2
  CHECK(std::fabs(g.dphi(3.0) + 1.0 / 9.0) < 1e-4);
  // scalar curvature of phi = 1 + k/r is 4k^2/(r^4 phi^3) + 2k^2/(r^4 phi^2) > 0
  double s = scalar_curvature(g, 2.0);
  CHECK(std::fabs(s - 7.0 / 54.0) < 1e-4);
  CHECK(s > 0.0);
}

TEST_CASE("profile constructor validation") {
  CHECK_THROWS(make_profile({1.0, 2.0, 3.0}, {1.0, 1.0, 1.0}, 1.0));  // too few
  CHECK_THROWS(make_profile({1.0, 2.0, 1.5, 3.0}, {1.0, 1.0, 1.0, 1.0}, 1.0));
  CHECK_THROWS(make_profile({1.0, 2.0, 3.0, 4.0}, {1.0, -1.0, 1.0, 1.0}, 1.0));
  CHECK_THROWS(make_profile({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 1.0, 1.0}, 0.3));
}

TEST_CASE("schwarzschild constructor clamps and validates") {
  CHECK_THROWS(make_schwarzschild(1.0, 1.0));  // inside the horizon
  auto g = make_schwarzschild(1.0, 3.0);        // boundary outside the horizon
  CHECK_FALSE(g.singular_at_rmin());
  CHECK(std::fabs(g.phi(3.0) - std::sqrt(3.0)) < 1e-15);
}

TEST_CASE("dispatcher builds each kind") {
  MetricParams mp;
  mp.r_min = 2.0;
  auto e = make_radial_metric(MetricKind::euclidean, mp);
  CHECK(e.r_min == 2.0);
  mp.mass = 1.0;
  mp.r_min = 2.0;
  auto s = make_radial_metric(MetricKind::schwarzschild, mp);
  CHECK(s.mass == 1.0);
}

}  // TEST_SUITE
