#pragma once

#include "geometry.hpp"

#include <vector>

namespace pharm {

// Exact p-harmonic capacitary potential in spherical symmetry:
//   u(r) = 1 - c a J(r),  J(r) = \int_r^inf phi(rho) rho^{-(a+1)} drho,
//   a = (3-p)/(p-1),      c = a^{-1} (C_p / 4pi)^{1/(p-1)},
// with u(r_min) = 0, u -> 1 at infinity. The flux law
//   |grad u|(r) = (C_p / (4 pi r^2))^{1/(p-1)} = c a r^{-(a+1)}
// is exact: only u itself needs quadrature.
struct RadialPotential {
  RadialMetric metric;
  double p = 2.0;
  double a = 1.0;
  double C_p = 0.0;
  double c = 0.0;

  // dense log-spaced sample table (r_i, u_i) for inspection and serialization;
  // the evaluators below integrate the tail afresh, so their accuracy is
  // ~1e-13 at any radius, not table-bound
  std::vector<double> r_table, u_table;

  double u(double r) const;
  double du(double r) const;    // du/dr = phi(r) c a r^{-(a+1)}
  double d2u(double r) const;
  double grad(double r) const;  // |grad u| = du / phi
  // tail integral evaluated directly from r (never as a difference of two
  // near-equal prefix sums, which loses all digits once r^{-a} is tiny)
  double J(double r) const;

  // f(t) = 1 - c t^{-a}, the potential value of the level with parameter t
  double level_value(double t) const;
  // inverse reparameterization s -> t = (c/(1-s))^{1/a}
  double t_from_value(double s) const;
};

// p-capacity of {r = r_min} in (M, g): C_p = 4 pi J(r_min)^{-(p-1)}.
// Requires 1 < p < 3 so the tail converges under AF decay.
double capacity(const RadialMetric& g, double p);

RadialPotential solve_radial(const RadialMetric& g, double p);

// Unique r with u(r) = f(t), by monotone root finding (1e-10 relative).
// Requires t >= c^{1/a} (the boundary level) up to tolerance.
double level_radius(const RadialPotential& pot, double t);

// Capacity of the condenser between the spheres r1 < r2:
//   4 pi [\int_{r1}^{r2} phi rho^{-2/(p-1)} drho]^{-(p-1)}
double annulus_capacity(const RadialMetric& g, double p, double r1, double r2);

std::string potential_to_json(const RadialPotential& pot);
// Reconstructs by re-solving the embedded metric/p and cross-checks the
// stored C_p (so every derived row is regenerable from the document alone).
RadialPotential potential_from_json(const std::string& text);

}  // namespace pharm
