#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pharm {

// Spherically symmetric asymptotically flat metric
//   g = phi(r)^2 dr^2 + r^2 (round unit sphere)
// on {r >= r_min}. phi -> 1 at infinity with |phi - 1| = O(r^{-sigma}),
// sigma > 1/2.
enum class MetricKind { euclidean, schwarzschild, profile };

struct ProfileInterp;  // pchip interpolant over the (r, phi) table

struct RadialMetric {
  MetricKind kind = MetricKind::euclidean;
  double mass = 0.0;   // schwarzschild parameter
  double r_min = 1.0;
  std::optional<double> adm_mass;  // exact for the model metrics, unset for profile

  // profile data: table plus tail decay exponent; beyond the last sample
  // phi(r) = 1 + (phi_last - 1) * (r_last / r)^sigma
  std::vector<double> prof_r, prof_phi;
  double sigma = 1.0;
  std::shared_ptr<const ProfileInterp> interp;

  double phi(double r) const;
  double dphi(double r) const;
  // phi at r = r0 + ds with the offset from r0 known exactly. For
  // schwarzschild this evaluates sqrt(r / (r - 2m)) with
  // r - 2m = (r0 - 2m) + ds formed without cancellation, which matters when
  // r0 sits on the horizon.
  double phi_offset(double r0, double ds) const;
  // true when phi(r_min) is infinite (horizon boundary)
  bool singular_at_rmin() const;

  std::string descriptor() const;
};

struct MetricParams {
  double mass = 1.0;
  double r_min = 1.0;
  std::vector<double> prof_r, prof_phi;
  double sigma = 1.0;
};

RadialMetric make_radial_metric(MetricKind kind, const MetricParams& params);
RadialMetric make_euclidean(double r_min);
RadialMetric make_schwarzschild(double mass, double r_min);
RadialMetric make_profile(std::vector<double> r, std::vector<double> phi,
                          double sigma);

// Coordinate-sphere geometry at radius r.
struct SphereData {
  double r;
  double area;  // 4 pi r^2
  double H;     // mean curvature w.r.t. the outward normal, 2/(r phi)
  double K;     // Gauss curvature of the sphere, 1/r^2
};

SphereData sphere_geometry(const RadialMetric& g, double r);

// Scalar curvature of g:
//   S = (2/r^2)(1 - phi^{-2}) + (4/(r phi^3)) phi'
double scalar_curvature(const RadialMetric& g, double r);

// Hawking mass of the coordinate sphere: (r/2)(1 - phi^{-2}).
double hawking_mass_sphere(const RadialMetric& g, double r);

// ADM mass read off at finite radius from the sphere integrals
//   (1/8pi) (4 pi r - \int_{S_r} H dA + area/r),
// which collapses to r (1 - 1/phi(r)). Converges to the ADM mass at rate 1/r.
// Pragmatic precondition r >= 10 r_min; callers extrapolate if needed.
double adm_mass_estimate(const RadialMetric& g, double r);

}  // namespace pharm
