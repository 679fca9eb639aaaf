#include "massbounds.hpp"

#include "num.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pharm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEqualityTol = 1e-8;

InequalityResult make_result(std::string id, double lhs, double rhs) {
  InequalityResult r;
  r.id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  double scale = std::max({1.0, std::fabs(lhs), std::fabs(rhs)});
  r.satisfied = r.slack >= -kEqualityTol * scale;
  r.equality = std::fabs(r.slack) < kEqualityTol * scale;
  return r;
}

// R(W) = a (sqrt(W) + sqrt(W + (1+2a)/a^2)) / (1+2a)
double curvature_factor(double a, double W) {
  return a * (std::sqrt(W) + std::sqrt(W + (1.0 + 2.0 * a) / (a * a))) /
         (1.0 + 2.0 * a);
}

}  // namespace

BoundaryData boundary_data(const RadialPotential& pot) {
  double r0 = pot.metric.r_min;
  SphereData sd = sphere_geometry(pot.metric, r0);
  double g = pot.grad(r0);
  BoundaryData bd;
  bd.int_gradH = g * sd.H * sd.area;
  bd.int_grad2 = g * g * sd.area;
  bd.area = sd.area;
  bd.W = sd.H * sd.H * sd.area / (16.0 * kPi);
  bd.H_max = sd.H;  // constant on the coordinate sphere
  bd.C_p = pot.C_p;
  bd.a = pot.a;
  bd.c = pot.c;
  bd.p = pot.p;
  return bd;
}

std::vector<InequalityResult> boundary_inequalities(const BoundaryData& bd,
                                                    double mass) {
  double a = bd.a, p = bd.p;
  double c1a = std::pow(bd.c, 1.0 / a);
  std::vector<InequalityResult> out;
  out.push_back(make_result("grad-H",
                            (1.0 + 2.0 * a) / (a * a) * bd.int_grad2,
                            4.0 * kPi + bd.int_gradH));
  out.push_back(make_result("mass-H",
                            c1a * (8.0 * kPi - bd.int_gradH / a),
                            4.0 * kPi * (5.0 - p) * mass));
  out.push_back(make_result("mass-grad",
                            c1a * (4.0 * kPi - bd.int_grad2 / (a * a)),
                            4.0 * kPi * (3.0 - p) * mass));
  return out;
}

double WillmoreBound::rhs_at_mass(double mass) const {
  return coeff_mass * mass + Q;
}

WillmoreBound willmore_mass_bound(const BoundaryData& bd) {
  double a = bd.a, p = bd.p;
  if (!(p < 3.0 - 1e-12))
    throw std::invalid_argument("willmore_mass_bound: p = 3 degenerates a");
  double rw = curvature_factor(a, bd.W);
  WillmoreBound wb;
  wb.Q = rw * rw;  // (a^2/(1+2a)^2)(sqrt(W)+sqrt(W+(1+2a)/a^2))^2
  wb.coeff_mass = std::pow(a, 1.0 / a) *
                  std::pow(4.0 * kPi / bd.C_p, 1.0 / (3.0 - p)) * (3.0 - p);
  wb.mass_lower_bound = (1.0 - wb.Q) / wb.coeff_mass;
  wb.hawking_lower_bound =
      std::sqrt(bd.C_p / (16.0 * kPi)) * (1.0 - bd.W);
  return wb;
}

HmaxReport hmax_bounds(const BoundaryData& bd, double mass,
                       const std::optional<RegionSpec>& region) {
  if (!(bd.H_max >= 0.0))
    throw std::invalid_argument("hmax_bounds: requires H_max >= 0");
  double a = bd.a, p = bd.p;
  double rw = curvature_factor(a, bd.W);
  double expo = 2.0 * (2.0 - p) / (3.0 - p);
  double rhs = std::pow(a, 1.0 / a) *
                   std::pow(4.0 * kPi / bd.C_p, 1.0 / (3.0 - p)) *
                   (5.0 - p) * mass +
               bd.H_max * std::pow(a, (1.0 - p) / (3.0 - p)) *
                   std::pow(bd.C_p / (4.0 * kPi), 1.0 / (3.0 - p)) *
                   std::pow(rw, expo);
  HmaxReport rep;
  rep.mass_bound = make_result("mass-Hmax", 2.0, rhs);

  if (region) {
    if (!(region->vol > 0.0 && region->L > 0.0))
      throw std::invalid_argument("hmax_bounds: region needs vol > 0, L > 0");
    // test-function capacity bound C_p(region) <= L^{-p} vol, or the exact
    // capacity when supplied (a smaller capacity weakens nothing: the
    // condition uses 4pi / C_p(region))
    double cap_bound = std::pow(region->L, -p) * region->vol;
    double cap = region->C_p_omega.value_or(cap_bound);
    double lhs_loc = bd.H_max * std::pow(rw, expo);
    double rhs_loc = 2.0 * std::pow(4.0 * kPi / cap, 1.0 / (3.0 - p)) *
                     std::pow(a, (p - 1.0) / (3.0 - p));
    rep.localized = make_result("localized-positivity", lhs_loc, rhs_loc);
    rep.certifies_positive_mass = rep.localized->satisfied;
  }
  return rep;
}

CapacityLimit capacity_p_limit(const RadialMetric& g,
                               const std::vector<double>& p_sequence) {
  if (p_sequence.size() < 3)
    throw std::invalid_argument(
        "capacity_p_limit: need at least 3 entries to extrapolate");
  for (size_t i = 0; i + 1 < p_sequence.size(); ++i)
    if (!(p_sequence[i] > p_sequence[i + 1]))
      throw std::invalid_argument("capacity_p_limit: sequence must decrease");
  if (!(p_sequence.front() <= 2.0 && p_sequence.back() > 1.0))
    throw std::invalid_argument("capacity_p_limit: sequence must lie in (1, 2]");

  CapacityLimit lim;
  std::vector<double> q, lnC;
  for (double p : p_sequence) {
    double C = capacity(g, p);
    lim.p_values.push_back(p);
    lim.C_values.push_back(C);
    q.push_back(p - 1.0);
    lnC.push_back(std::log(C));
  }
  lim.extrapolated = std::exp(fit_limit_qlogq(q, lnC));
  lim.boundary_area = 4.0 * kPi * g.r_min * g.r_min;
  return lim;
}

}  // namespace pharm
