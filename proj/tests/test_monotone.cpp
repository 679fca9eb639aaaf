#include <doctest.h>

#include "geometry.hpp"
#include "levelsurf.hpp"
#include "monotone.hpp"
#include "num.hpp"
#include "radial.hpp"

#include <cmath>
#include <numbers>

using namespace pharm;

namespace {
constexpr double kPi = std::numbers::pi;

QuantitySeries schw_series(double p, const std::vector<double>& ts) {
  auto pot = solve_radial(make_schwarzschild(1.0, 2.0), p);
  return quantity_series(pot, ts);
}

// log-spaced t grid starting at the boundary level c^{1/a}
QuantitySeries schw_series_span(double p, double decades, int n) {
  auto pot = solve_radial(make_schwarzschild(1.0, 2.0), p);
  double t0 = std::pow(pot.c, 1.0 / pot.a);
  return quantity_series(pot, log_grid(t0, t0 * std::pow(10.0, decades), n));
}
}  // namespace

TEST_SUITE("monotone") {

TEST_CASE("flat space: every quantity vanishes identically") {
  for (double p : {1.25, 1.5, 2.0}) {
    auto pot = solve_radial(make_euclidean(1.0), p);
    auto s = quantity_series(pot, log_grid(1.0, 100.0, 40));
    for (const auto& row : s.rows) {
      CHECK(std::fabs(row.F) < 1e-6);
      CHECK(std::fabs(row.A) < 1e-6);
      CHECK(std::fabs(row.B) < 1e-6);
      CHECK(std::fabs(row.D) < 1e-6);
      CHECK(std::fabs(row.G) < 1e-6);
      CHECK(std::fabs(row.m_H) < 1e-7);
      CHECK(row.regular);
    }
    auto rep = series_checks(s);
    CHECK(rep.violations.empty());
  }
}

TEST_CASE("harmonic closed forms outside the horizon") {
  // p = 2, m = 1: B = 4 pi - pi/t, A = 12 pi - 4 pi/t, F = 8 pi - 3 pi/t,
  // D = pi/t^3, G = -(4 pi - pi/t)/t^2, m_H = 1
  auto s = schw_series(2.0, {1.0, 1.5, 2.0, 10.0, 100.0});
  for (const auto& row : s.rows) {
    double t = row.t;
    CHECK(std::fabs(row.B - (4.0 * kPi - kPi / t)) < 1e-6);
    CHECK(std::fabs(row.A - (12.0 * kPi - 4.0 * kPi / t)) < 1e-6);
    CHECK(std::fabs(row.F - (8.0 * kPi - 3.0 * kPi / t)) < 1e-6);
    CHECK(std::fabs(row.D - kPi / (t * t * t)) < 1e-6);
    CHECK(std::fabs(row.G + (4.0 * kPi - kPi / t) / (t * t)) < 1e-6);
    CHECK(std::fabs(row.m_H - 1.0) < 1e-7);
  }
  auto rep = series_checks(s);
  CHECK(rep.violations.empty());
}

TEST_CASE("algebraic relations hold on a dense series") {
  for (double p : {1.25, 1.5, 1.9}) {
    auto s = schw_series_span(p, 3.0, 60);
    auto rep = series_checks(s);
    CHECK(rep.alg_F < 1e-12);   // F = A - B
    CHECK(rep.alg_D < 1e-12);   // t^(a+1) D = (1+2a) B - a A
    CHECK(rep.alg_G < 1e-12);   // G = -c a^2 t^-(a+1) B
    CHECK(rep.violations.empty());
    CHECK(rep.regular_rows == s.rows.size());
  }
}

TEST_CASE("derivative identities converge at second order in the grid step") {
  // D' = -a t^-(a+1) F' and G' = c a^3 t^-(a+2) F, checked by halving the
  // log step: residual maxima must drop by about 4
  for (double p : {1.25, 2.0}) {
    auto coarse = series_checks(schw_series_span(p, 2.0, 101));
    auto fine = series_checks(schw_series_span(p, 2.0, 201));
    CHECK(fine.fd_D < 0.5 * coarse.fd_D + 1e-9);
    CHECK(fine.fd_G < 0.5 * coarse.fd_G + 1e-9);
  }
  // mild exponent on a dense grid: truncation at the steep end is ~h^2 D''',
  // about 1e-2 for this spacing
  auto dense = series_checks(schw_series_span(2.0, 2.0, 201));
  CHECK(dense.fd_D < 0.05);
  CHECK(dense.fd_G < 0.05);
}

TEST_CASE("monotonicity directions are the advertised ones") {
  auto s = schw_series_span(1.5, 2.3, 50);
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    const auto& a = s.rows[i - 1];
    const auto& b = s.rows[i];
    CHECK(b.F >= a.F - 1e-9);
    CHECK(b.A >= a.A - 1e-9);
    CHECK(b.B >= a.B - 1e-9);
    CHECK(b.D <= a.D + 1e-9);
    CHECK(b.G >= a.G - 1e-9);
  }
  // positivity forced by the structure: D >= 0 and (1+2a)B >= aA
  double a_exp = s.a;
  for (const auto& row : s.rows) {
    CHECK(row.D >= -1e-10);
    CHECK((1.0 + 2.0 * a_exp) * row.B - a_exp * row.A >= -1e-8);
  }
}

TEST_CASE("a corrupted series is flagged") {
  auto s = schw_series_span(1.5, 1.7, 20);
  s.rows[7].B = s.rows[6].B - 1.0;  // push B below its predecessor
  auto rep = series_checks(s);
  // exactly one monotonicity violation, at the corrupted row
  std::size_t mono = 0;
  for (const auto& v : rep.violations)
    if (v.what == "B nondecreasing") {
      ++mono;
      CHECK(v.row == 7);
    }
  CHECK(mono == 1);
  CHECK(rep.alg_F > 1e-7);  // the algebra cross-ties catch it too
}

TEST_CASE("series on a general profile stays monotone with positive curvature") {
  auto rs = log_grid(1.0, 50.0, 200);
  std::vector<double> ph;
  for (double r : rs) ph.push_back(1.0 + 1.0 / r);
  auto pot = solve_radial(make_profile(rs, ph, 1.0), 1.5);
  double t_lo = std::pow(pot.c, 1.0 / pot.a);
  auto s = quantity_series(pot, log_grid(t_lo * 1.0000001, t_lo * 100.0, 40));
  auto rep = series_checks(s, 1e-6);
  CHECK(rep.violations.empty());
  CHECK(s.rows.back().F >= s.rows.front().F);
}

TEST_CASE("green quantity in the u parametrization") {
  // flat space: G(tau) = -4 pi a^2 tau + (int |grad u|^2)/tau = 0 exactly
  auto flat = solve_radial(make_euclidean(1.0), 1.5);
  for (auto [tau, v] : green_quantity(flat, {0.2, 0.5, 0.8}))
    CHECK(std::fabs(v) < 1e-6);
  // outside the horizon with p = 2 it equals G(t) at tau = c t^-a
  auto pot = solve_radial(make_schwarzschild(1.0, 2.0), 2.0);
  auto gs = green_quantity(pot, {0.2, 0.4, 0.6});
  for (auto [tau, v] : gs) {
    double t = 1.0 / tau;  // c = 1, a = 1
    double expect = -(4.0 * kPi - kPi / t) / (t * t);
    CHECK(std::fabs(v - expect) < 1e-6);
  }
  // nondecreasing in t means nonincreasing in tau = c t^-a
  CHECK(gs[0].second >= gs[1].second);
  CHECK(gs[1].second >= gs[2].second);
  CHECK_THROWS(green_quantity(pot, {0.0}));
  CHECK_THROWS(green_quantity(pot, {1.0}));
}

TEST_CASE("csv serialization carries the exact header and is deterministic") {
  auto s = schw_series(2.0, {1.0, 2.0});
  auto csv = series_to_csv(s);
  CHECK(csv.rfind("t,s,F,A,B,D,G,m_H,regular\n", 0) == 0);
  CHECK(csv == series_to_csv(s));
}

TEST_CASE("empty grids are rejected") {
  auto pot = solve_radial(make_euclidean(1.0), 2.0);
  CHECK_THROWS(quantity_series(pot, {}));
}

}  // TEST_SUITE
