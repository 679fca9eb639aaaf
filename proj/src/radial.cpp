#include "radial.hpp"

#include "num.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pharm {

namespace {

constexpr double kPi = std::numbers::pi;

double check_exponent(const RadialMetric& g, double p) {
  if (!(p > 1.0 && p < 3.0))
    throw std::invalid_argument("capacity: p must lie in (1, 3)");
  if (g.kind == MetricKind::profile && !(g.sigma > 0.0))
    throw std::invalid_argument("capacity: divergent tail (sigma <= 0)");
  return (3.0 - p) / (p - 1.0);
}

// \int_{r1}^{r2} phi(rho) rho^{-(a+1)} drho on a finite interval.
// When phi has a sqrt-type blowup at or near r1 (horizon metrics),
// rho = r1 + s^2 turns the integrand into the smooth
// phi_offset(r1, s^2) * (r1+s^2)^{-(a+1)} * 2s; phi_offset keeps the
// distance to the horizon in exact arithmetic. Tolerances are relative:
// these integrals shrink like r^{-a} and an absolute floor would let the
// driver stop before any refinement.
double segment_integral(const RadialMetric& g, double a, double r1, double r2,
                        bool substitute_lo) {
  if (r2 <= r1) return 0.0;
  if (substitute_lo) {
    auto f = [&](double s) {
      double ds = s * s;
      return g.phi_offset(r1, ds) * std::pow(r1 + ds, -(a + 1.0)) * 2.0 * s;
    };
    return integrate(f, 0.0, std::sqrt(r2 - r1), 0.0, 1e-13);
  }
  auto f = [&](double rho) { return g.phi(rho) * std::pow(rho, -(a + 1.0)); };
  return integrate(f, r1, r2, 0.0, 1e-13);
}

// \int_R^inf phi rho^{-(a+1)} drho via y = rho^{-a}:
//   (1/a) \int_0^{R^{-a}} phi(y^{-1/a}) dy
double tail_integral(const RadialMetric& g, double a, double R) {
  auto f = [&](double y) { return g.phi(std::pow(y, -1.0 / a)); };
  return integrate(f, 0.0, std::pow(R, -a), 0.0, 1e-13) / a;
}

// J(r) assembled from at most one near-boundary segment plus the
// substituted tail, both integrated directly from r outward.
double eval_J(const RadialMetric& g, double a, double r) {
  if (g.kind == MetricKind::euclidean) return std::pow(r, -a) / a;  // phi = 1
  double split = 2.0 * g.r_min;
  if (r >= split) return tail_integral(g, a, r);
  bool sub = g.kind == MetricKind::schwarzschild;  // phi stiff near 2m
  return segment_integral(g, a, r, split, sub) + tail_integral(g, a, split);
}

}  // namespace

double capacity(const RadialMetric& g, double p) {
  double a = check_exponent(g, p);
  return 4.0 * kPi * std::pow(eval_J(g, a, g.r_min), -(p - 1.0));
}

RadialPotential solve_radial(const RadialMetric& g, double p) {
  double a = check_exponent(g, p);
  RadialPotential pot;
  pot.metric = g;
  pot.p = p;
  pot.a = a;

  // table of J at log-spaced nodes, accumulated inward from the tail so
  // every entry is a sum of positive pieces (no differencing)
  const int n = 512;
  pot.r_table = log_grid(g.r_min, 1e5 * g.r_min, n);
  std::vector<double> Jt(n);
  if (g.kind == MetricKind::euclidean) {
    for (int i = 0; i < n; ++i) Jt[i] = std::pow(pot.r_table[i], -a) / a;
  } else {
    Jt[n - 1] = tail_integral(g, a, pot.r_table[n - 1]);
    for (int i = n - 2; i >= 0; --i) {
      bool sub = g.kind == MetricKind::schwarzschild &&
                 pot.r_table[i] < 2.0 * g.r_min;
      Jt[i] = Jt[i + 1] +
              segment_integral(g, a, pot.r_table[i], pot.r_table[i + 1], sub);
    }
  }

  pot.C_p = 4.0 * kPi * std::pow(Jt[0], -(p - 1.0));
  pot.c = std::pow(pot.C_p / (4.0 * kPi), 1.0 / (p - 1.0)) / a;

  pot.u_table.resize(n);
  double ca = pot.c * a;
  for (int i = 0; i < n; ++i) pot.u_table[i] = 1.0 - ca * Jt[i];
  pot.u_table[0] = 0.0;
  return pot;
}

double RadialPotential::J(double r) const {
  if (!(r >= metric.r_min * (1.0 - 1e-12)))
    throw std::domain_error("RadialPotential: r below r_min");
  r = std::max(r, metric.r_min);
  return eval_J(metric, a, r);
}

double RadialPotential::u(double r) const {
  double j = J(r);  // also range-checks r
  if (r <= metric.r_min) return 0.0;  // boundary condition, exact
  return 1.0 - c * a * j;
}

double RadialPotential::du(double r) const {
  return metric.phi(r) * c * a * std::pow(r, -(a + 1.0));
}

double RadialPotential::d2u(double r) const {
  return c * a * (metric.dphi(r) * std::pow(r, -(a + 1.0)) -
                  (a + 1.0) * metric.phi(r) * std::pow(r, -(a + 2.0)));
}

double RadialPotential::grad(double r) const {
  return c * a * std::pow(r, -(a + 1.0));
}

double RadialPotential::level_value(double t) const {
  return 1.0 - c * std::pow(t, -a);
}

double RadialPotential::t_from_value(double s) const {
  return std::pow(c / (1.0 - s), 1.0 / a);
}

double level_radius(const RadialPotential& pot, double t) {
  double t_bdry = std::pow(pot.c, 1.0 / pot.a);
  if (t < t_bdry * (1.0 - 1e-9))
    throw std::domain_error(
        "level_radius: t below the boundary level c^{1/a} = " +
        fmt_g17(t_bdry));
  t = std::max(t, t_bdry);
  double target = std::pow(t, -pot.a);  // solves a J(r) = t^{-a}
  double r0 = pot.metric.r_min;
  // a J(r_min) = 1/c since u(r_min) = 0, so the boundary is hit exactly when
  // t reaches the boundary level
  if (1.0 / pot.c <= target) return r0;
  // phi >= 1 gives a J(r) >= r^{-a}, so the root lies at or above both t and
  // r_min. f(r) = a J(r) - t^{-a} is decreasing with the closed-form slope
  // -a phi(r) r^{-(a+1)}; Newton from the left, with a bisection fallback
  // whenever a step leaves the sign-change bracket.
  double lo = std::max(r0, t);
  double hi = std::numeric_limits<double>::infinity();
  double r = lo;
  for (int k = 0; k < 200; ++k) {
    double f = pot.a * pot.J(r) - target;
    if (f >= 0.0) lo = r; else hi = r;
    double step = f / (pot.a * pot.metric.phi(r) * std::pow(r, -(pot.a + 1.0)));
    if (std::abs(step) <= 1e-13 * r) return r + step;
    double next = r + step;
    if (!(next > lo && next < hi))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * lo;
    r = next;
  }
  return r;
}

double annulus_capacity(const RadialMetric& g, double p, double r1, double r2) {
  double a = check_exponent(g, p);
  if (!(r1 >= g.r_min && r2 > r1))
    throw std::invalid_argument("annulus_capacity: need r_min <= r1 < r2");
  bool sing = g.singular_at_rmin() && r1 <= g.r_min * (1.0 + 1e-12);
  double I = segment_integral(g, a, r1, r2, sing);
  return 4.0 * kPi * std::pow(I, -(p - 1.0));
}

std::string potential_to_json(const RadialPotential& pot) {
  nlohmann::json j;
  j["p"] = pot.p;
  j["a"] = pot.a;
  j["c"] = pot.c;
  j["C_p"] = pot.C_p;
  nlohmann::json m;
  m["descriptor"] = pot.metric.descriptor();
  switch (pot.metric.kind) {
    case MetricKind::euclidean:
      m["kind"] = "euclidean";
      break;
    case MetricKind::schwarzschild:
      m["kind"] = "schwarzschild";
      m["mass"] = pot.metric.mass;
      break;
    case MetricKind::profile:
      m["kind"] = "profile";
      m["r"] = pot.metric.prof_r;
      m["phi"] = pot.metric.prof_phi;
      m["sigma"] = pot.metric.sigma;
      break;
  }
  m["r_min"] = pot.metric.r_min;
  j["metric"] = m;
  j["u_table"] = {{"r", pot.r_table}, {"u", pot.u_table}};
  return j.dump(2);
}

RadialPotential potential_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const auto& m = j.at("metric");
  std::string kind = m.at("kind");
  RadialMetric g;
  if (kind == "euclidean") {
    g = make_euclidean(m.at("r_min").get<double>());
  } else if (kind == "schwarzschild") {
    g = make_schwarzschild(m.at("mass").get<double>(), m.at("r_min").get<double>());
  } else if (kind == "profile") {
    g = make_profile(m.at("r").get<std::vector<double>>(),
                     m.at("phi").get<std::vector<double>>(),
                     m.at("sigma").get<double>());
  } else {
    throw std::invalid_argument("potential_from_json: unknown metric kind");
  }
  RadialPotential pot = solve_radial(g, j.at("p").get<double>());
  double stored = j.at("C_p").get<double>();
  if (std::fabs(stored - pot.C_p) > 1e-10 * (std::fabs(stored) + 1.0))
    throw std::runtime_error("potential_from_json: stored C_p inconsistent with re-solve");
  return pot;
}

}  // namespace pharm
