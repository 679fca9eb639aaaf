#include "identities.hpp"

#include "num.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pharm {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kSystemTol = 1e-6;
}  // namespace

double BvpSolution::w(double r) const {
  if (!has_pot) return r;
  // z = (1-u)/c = a J(r), formed without cancellation near u = 1
  double z = pot.a * pot.J(r);
  return std::pow(z, -1.0 / pot.a);
}

double BvpSolution::dw(double r) const {
  if (!has_pot) return 1.0;
  double a = pot.a;
  double z = a * pot.J(r);
  return metric.phi(r) * std::pow(r, -(a + 1.0)) * std::pow(z, -1.0 / a - 1.0);
}

double BvpSolution::d2w(double r) const {
  if (!has_pot) return 0.0;
  double a = pot.a;
  double z = a * pot.J(r);
  double ph = metric.phi(r), dph = metric.dphi(r);
  double t1 = (dph * std::pow(r, -(a + 1.0)) -
               (a + 1.0) * ph * std::pow(r, -(a + 2.0))) *
              std::pow(z, -1.0 / a - 1.0);
  double t2 = (a + 1.0) * ph * ph * std::pow(r, -2.0 * (a + 1.0)) *
              std::pow(z, -1.0 / a - 2.0);
  return t1 + t2;
}

double BvpSolution::grad(double r) const { return dw(r) / metric.phi(r); }

double BvpSolution::radius_of_level(double t) const {
  if (!has_pot) return t;
  double lo = metric.r_min, hi = 2.0 * std::max(lo, t);
  for (int k = 0; k < 200 && w(hi) < t; ++k) hi *= 2.0;
  if (w(lo) >= t) return lo;
  auto fn = [&](double r) { return w(r) - t; };
  return find_root(fn, lo, hi, 1e-12);
}

namespace {

struct PointData {
  double w, gw, wnn, lap, H, K, S, phi;
};

PointData point_data(const BvpSolution& sol, double r) {
  PointData d;
  d.phi = sol.metric.phi(r);
  double dph = sol.metric.dphi(r);
  double w1 = sol.dw(r), w2 = sol.d2w(r);
  d.w = sol.w(r);
  d.gw = w1 / d.phi;
  d.wnn = w2 / (d.phi * d.phi) - w1 * dph / (d.phi * d.phi * d.phi);
  d.H = 2.0 / (r * d.phi);
  d.lap = d.wnn + d.H * d.gw;
  d.K = 1.0 / (r * r);
  d.S = scalar_curvature(sol.metric, r);
  return d;
}

// |T|^2 for radial w: the Hessian is diagonal with nu-nu entry w_nunu and
// angular entries |grad w| H / 2, so
//   |T|^2 = w_nunu^2 + 2 (|grad w| H/2 - |grad w|^2 / w)^2
double t_squared(const PointData& d) {
  double ang = d.gw * d.H * 0.5 - d.gw * d.gw / d.w;
  return d.wnn * d.wnn + 2.0 * ang * ang;
}

double r_alpha(const BvpSolution& sol, const PointData& d) {
  return d.S * d.gw +
         (t_squared(d) - sol.alpha * sol.alpha * d.wnn * d.wnn) / d.gw;
}

void verify_system(BvpSolution& sol) {
  auto radii = log_grid(sol.r_lo, sol.r_hi, 100);
  for (double r : radii) {
    double res = system_residual(sol, r);
    if (!(std::fabs(res) < kSystemTol))
      throw std::runtime_error(
          "BvpSolution: system residual " + fmt_g17(res) + " at r = " +
          fmt_g17(r) + " exceeds tolerance (inconsistent potential)");
  }
}

}  // namespace

double system_residual(const BvpSolution& sol, double r) {
  PointData d = point_data(sol, r);
  return d.lap - sol.alpha * d.wnn - 2.0 * d.gw * d.gw / d.w;
}

BvpSolution transform_field(const RadialPotential& pot) {
  return transform_field(pot, 2.0 / (pot.p - 1.0));
}

BvpSolution transform_field(const RadialPotential& pot, double beta) {
  double alpha = 2.0 - pot.p;
  double beta_std = 2.0 / (1.0 - alpha);  // = 2/(p-1)
  if (!(beta == 0.0 || std::fabs(beta - beta_std) < 1e-12 * beta_std))
    throw std::invalid_argument(
        "transform_field: beta must be 0 or 2/(1-alpha)");
  BvpSolution sol;
  sol.metric = pot.metric;
  sol.alpha = alpha;
  sol.beta = beta;
  sol.has_pot = true;
  sol.pot = pot;
  sol.r_lo = pot.metric.singular_at_rmin() ? 1.05 * pot.metric.r_min
                                           : pot.metric.r_min;
  sol.r_hi = 50.0 * pot.metric.r_min;
  verify_system(sol);
  return sol;
}

BvpSolution imcf_solution(const RadialMetric& g, double r_lo, double r_hi) {
  if (!(r_lo >= g.r_min && r_hi > r_lo))
    throw std::invalid_argument("imcf_solution: need r_min <= r_lo < r_hi");
  BvpSolution sol;
  sol.metric = g;
  sol.alpha = 1.0;
  sol.beta = 0.0;  // 2/(1-alpha) is a pole at alpha = 1
  sol.has_pot = false;
  sol.r_lo = r_lo;
  sol.r_hi = r_hi;
  verify_system(sol);
  return sol;
}

double r_alpha_excess(const BvpSolution& sol, double r) {
  PointData d = point_data(sol, r);
  return r_alpha(sol, d) - d.S * d.gw;
}

double identity_check_pointwise(const BvpSolution& sol, double r) {
  if (sol.beta == 1.0)
    throw std::invalid_argument("identity_check: beta = 1 is a pole");
  PointData d = point_data(sol, r);
  double lhs = std::pow(d.w, -sol.beta) *
               (r_alpha(sol, d) - 2.0 * d.K * d.gw);

  double kappa = (2.0 * sol.beta - 1.0) / (sol.beta - 1.0);
  auto flux = [&](double rho) {
    PointData q = point_data(sol, rho);
    double xnu = 2.0 * (q.wnn - q.lap + kappa * q.gw * q.gw / q.w);
    return rho * rho * std::pow(q.w, -sol.beta) * xnu;
  };
  double rhs = deriv5(flux, r, 1e-3 * r) / (d.phi * r * r);
  return std::fabs(lhs - rhs);
}

double identity_check_integrated(const BvpSolution& sol, double t1, double t2) {
  if (sol.beta == 1.0)
    throw std::invalid_argument("identity_check: beta = 1 is a pole");
  if (!(t2 > t1)) throw std::invalid_argument("identity_check: need t1 < t2");
  double r1 = sol.radius_of_level(t1);
  double r2 = sol.radius_of_level(t2);

  auto bulk_f = [&](double rho) {
    PointData q = point_data(sol, rho);
    return std::pow(q.w, -sol.beta) * r_alpha(sol, q) * 4.0 * kPi * rho *
           rho * q.phi;
  };
  double bulk = 0.5 * integrate(bulk_f, r1, r2, 1e-9, 1e-10);

  double beta = sol.beta;
  double flow = 4.0 * kPi *
                (std::pow(t2, 1.0 - beta) - std::pow(t1, 1.0 - beta)) /
                (1.0 - beta);

  double kappa = (2.0 * beta - 1.0) / (beta - 1.0);
  auto bdry = [&](double r) {
    PointData q = point_data(sol, r);
    return 4.0 * kPi * r * r * std::pow(q.w, -beta) *
           (-q.H * q.gw + kappa * q.gw * q.gw / q.w);
  };
  double rhs = flow + (bdry(r2) - bdry(r1));
  return std::fabs(bulk - rhs);
}

RadialMetric rigidity_metric(double m_H, int chi, double rho_lo, double rho_hi) {
  if (chi != 2)
    throw std::invalid_argument("rigidity_metric: only chi = 2 (spherical levels)");
  if (!(rho_hi > rho_lo))
    throw std::invalid_argument("rigidity_metric: need rho_lo < rho_hi");
  if (!(1.0 - m_H / rho_lo > 0.0))
    throw std::invalid_argument(
        "rigidity_metric: range crosses the coordinate singularity rho = m_H");
  if (m_H == 0.0) return make_euclidean(rho_lo);
  auto rho = log_grid(rho_lo, rho_hi, 600);
  std::vector<double> phi(rho.size());
  for (size_t i = 0; i < rho.size(); ++i)
    phi[i] = 1.0 / std::sqrt(1.0 - m_H / rho[i]);
  return make_profile(std::move(rho), std::move(phi), 1.0);
}

std::pair<double, double> ba_via_substitution(const RadialPotential& pot,
                                              double t) {
  double p = pot.p, a = pot.a, c = pot.c;
  double r = level_radius(pot, t);
  double ph = pot.metric.phi(r), dph = pot.metric.dphi(r);
  SphereData sd = sphere_geometry(pot.metric, r);

  // U = (1-p) log(1-u); 1-u = c a J(r) evaluated without cancellation
  double one_minus_u = c * a * pot.J(r);
  double u1 = pot.du(r);
  double u2 = pot.d2u(r);
  double U1 = (p - 1.0) * u1 / one_minus_u;
  double U2 = (p - 1.0) *
              (u2 / one_minus_u + u1 * u1 / (one_minus_u * one_minus_u));
  double gU = U1 / ph;
  double Unn = U2 / (ph * ph) - U1 * dph / (ph * ph * ph);

  double tau = (1.0 - p) * std::log(c * std::pow(t, -a));
  double pref = std::pow(c, 1.0 / a) * std::exp(tau / (3.0 - p));
  double m = sd.H + (p - 1.0) * Unn / gU;
  double B = 4.0 * kPi * pref *
             (1.0 - (m * m * sd.area) / (4.0 * kPi * (3.0 - p) * (3.0 - p)));
  double A = 8.0 * kPi * pref *
             (1.0 - (sd.H * m * sd.area) / (8.0 * kPi * (3.0 - p)));
  return {B, A};
}

}  // namespace pharm
