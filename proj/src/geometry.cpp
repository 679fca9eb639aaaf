#include "geometry.hpp"

#include <cmath>
// boost 1.74 pchip.hpp calls isnan unqualified; pull in the std overload first
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <numbers>
#include <stdexcept>

namespace pharm {

struct ProfileInterp {
  boost::math::interpolators::pchip<std::vector<double>> spline;
  ProfileInterp(std::vector<double> r, std::vector<double> phi)
      : spline(std::move(r), std::move(phi)) {}
};

double RadialMetric::phi(double r) const {
  switch (kind) {
    case MetricKind::euclidean:
      return 1.0;
    case MetricKind::schwarzschild:
      return 1.0 / std::sqrt(1.0 - 2.0 * mass / r);
    case MetricKind::profile: {
      if (r <= prof_r.back())
        return interp->spline(std::max(r, prof_r.front()));
      double tail = (prof_phi.back() - 1.0) * std::pow(prof_r.back() / r, sigma);
      return 1.0 + tail;
    }
  }
  return 1.0;
}

double RadialMetric::dphi(double r) const {
  switch (kind) {
    case MetricKind::euclidean:
      return 0.0;
    case MetricKind::schwarzschild: {
      double ph = phi(r);
      return -(mass / (r * r)) * ph * ph * ph;
    }
    case MetricKind::profile: {
      if (r <= prof_r.back())
        return interp->spline.prime(std::max(r, prof_r.front()));
      double tail = (prof_phi.back() - 1.0) * std::pow(prof_r.back() / r, sigma);
      return -sigma * tail / r;
    }
  }
  return 0.0;
}

double RadialMetric::phi_offset(double r0, double ds) const {
  if (kind == MetricKind::schwarzschild) {
    double r = r0 + ds;
    double delta = (r0 - 2.0 * mass) + ds;
    return std::sqrt(r / delta);
  }
  return phi(r0 + ds);
}

bool RadialMetric::singular_at_rmin() const {
  return kind == MetricKind::schwarzschild &&
         r_min - 2.0 * mass < 1e-12 * r_min;
}

std::string RadialMetric::descriptor() const {
  switch (kind) {
    case MetricKind::euclidean:
      return "euclidean r_min=" + std::to_string(r_min);
    case MetricKind::schwarzschild:
      return "schwarzschild m=" + std::to_string(mass) +
             " r_min=" + std::to_string(r_min);
    case MetricKind::profile:
      return "profile n=" + std::to_string(prof_r.size()) +
             " r_min=" + std::to_string(r_min) +
             " sigma=" + std::to_string(sigma);
  }
  return "";
}

RadialMetric make_euclidean(double r_min) {
  if (!(r_min > 0.0)) throw std::invalid_argument("euclidean: r_min must be > 0");
  RadialMetric g;
  g.kind = MetricKind::euclidean;
  g.r_min = r_min;
  g.adm_mass = 0.0;
  return g;
}

RadialMetric make_schwarzschild(double mass, double r_min) {
  if (!(mass > 0.0)) throw std::invalid_argument("schwarzschild: mass must be > 0");
  if (r_min < 2.0 * mass * (1.0 - 1e-12))
    throw std::invalid_argument("schwarzschild: r_min must be >= 2m (horizon)");
  RadialMetric g;
  g.kind = MetricKind::schwarzschild;
  g.mass = mass;
  g.r_min = std::max(r_min, 2.0 * mass);
  g.adm_mass = mass;
  return g;
}

RadialMetric make_profile(std::vector<double> r, std::vector<double> phi,
                          double sigma) {
  if (r.size() != phi.size() || r.size() < 4)
    throw std::invalid_argument("profile: need >= 4 matched (r, phi) samples");
  for (size_t i = 0; i + 1 < r.size(); ++i)
    if (!(r[i] < r[i + 1]))
      throw std::invalid_argument("profile: r samples must be increasing");
  for (double v : phi)
    if (!(v > 0.0)) throw std::invalid_argument("profile: phi must be > 0");
  if (!(sigma > 0.5))
    throw std::invalid_argument("profile: AF decay needs sigma > 1/2");
  RadialMetric g;
  g.kind = MetricKind::profile;
  g.r_min = r.front();
  g.sigma = sigma;
  g.prof_r = r;
  g.prof_phi = phi;
  g.interp = std::make_shared<ProfileInterp>(std::move(r), std::move(phi));
  return g;
}

RadialMetric make_radial_metric(MetricKind kind, const MetricParams& params) {
  switch (kind) {
    case MetricKind::euclidean:
      return make_euclidean(params.r_min);
    case MetricKind::schwarzschild:
      return make_schwarzschild(params.mass, params.r_min);
    case MetricKind::profile:
      return make_profile(params.prof_r, params.prof_phi, params.sigma);
  }
  throw std::invalid_argument("make_radial_metric: unknown kind");
}

SphereData sphere_geometry(const RadialMetric& g, double r) {
  if (!(r >= g.r_min)) throw std::invalid_argument("sphere_geometry: r < r_min");
  SphereData s;
  s.r = r;
  s.area = 4.0 * std::numbers::pi * r * r;
  s.H = 2.0 / (r * g.phi(r));
  s.K = 1.0 / (r * r);
  return s;
}

double scalar_curvature(const RadialMetric& g, double r) {
  if (!(r >= g.r_min)) throw std::invalid_argument("scalar_curvature: r < r_min");
  double ph = g.phi(r);
  double inv2 = 1.0 / (ph * ph);
  return (2.0 / (r * r)) * (1.0 - inv2) +
         (4.0 / (r * ph * ph * ph)) * g.dphi(r);
}

double hawking_mass_sphere(const RadialMetric& g, double r) {
  double ph = g.phi(r);
  return 0.5 * r * (1.0 - 1.0 / (ph * ph));
}

double adm_mass_estimate(const RadialMetric& g, double r) {
  if (!(r >= 10.0 * g.r_min))
    throw std::invalid_argument("adm_mass_estimate: needs r >= 10 r_min");
  return r * (1.0 - 1.0 / g.phi(r));
}

}  // namespace pharm
