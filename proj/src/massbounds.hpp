#pragma once

#include "radial.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pharm {

// Boundary-sphere data of a capacitary potential, the inputs of every mass
// inequality below.
struct BoundaryData {
  double int_gradH = 0.0;  // \int_{dM} |grad u| H
  double int_grad2 = 0.0;  // \int_{dM} |grad u|^2
  double area = 0.0;
  double W = 0.0;          // Willmore functional (1/16pi) \int_{dM} H^2
  double H_max = 0.0;
  double C_p = 0.0, a = 0.0, c = 0.0, p = 2.0;
};

BoundaryData boundary_data(const RadialPotential& pot);

struct InequalityResult {
  std::string id;
  double lhs = 0.0, rhs = 0.0;
  double slack = 0.0;      // rhs - lhs; >= 0 means satisfied
  bool satisfied = false;
  bool equality = false;   // |slack| < 1e-8 * scale (rigidity indicator)
};

// The three boundary inequalities, with mass the ADM mass (exact on model
// metrics, estimated otherwise):
//   grad-H:    a^{-2}(1+2a) \int |grad u|^2  <=  4 pi + \int |grad u| H
//   mass-H:    c^{1/a} (8 pi - a^{-1} \int |grad u| H)  <=  4 pi (5-p) m
//   mass-grad: c^{1/a} (4 pi - a^{-2} \int |grad u|^2)  <=  4 pi (3-p) m
// The slacks satisfy the exact linear relation
//   slack(mass-H) = (c^{1/a}/a) slack(grad-H) + ((1+2a)/a) slack(mass-grad).
std::vector<InequalityResult> boundary_inequalities(const BoundaryData& bd,
                                                    double mass);

// Capacity--Willmore mass bound:
//   1 <= a^{1/a} (4pi/C_p)^{1/(3-p)} (3-p) m + Q(W),
//   Q(W) = (a^2/(1+2a)^2) (sqrt(W) + sqrt(W + (1+2a)/a^2))^2,
// returned as the implied lower bound on m, together with the Hawking-style
// bound sqrt(C_p/16pi)(1 - W) obtained by using the capacity in place of the
// boundary area (exact in the p -> 1 limit for outer-minimizing boundaries).
struct WillmoreBound {
  double mass_lower_bound = 0.0;   // m >= (1 - Q) / [a^{1/a}(4pi/C_p)^{1/(3-p)}(3-p)]
  double hawking_lower_bound = 0.0;
  double rhs_at_mass(double mass) const;  // full right side of the 1 <= ... form
  double coeff_mass = 0.0, Q = 0.0;
};

WillmoreBound willmore_mass_bound(const BoundaryData& bd);

// Mean-curvature mass bound and the localized positivity test.
//   2 <= a^{1/a} (4pi/C_p)^{1/(3-p)} (5-p) m
//        + H_max a^{(1-p)/(3-p)} (C_p/4pi)^{1/(3-p)} R(W)^{2(2-p)/(3-p)},
//   R(W) = a (sqrt(W) + sqrt(W + (1+2a)/a^2)) / (1+2a).
// With region data {vol, L} (and optionally the exact capacity of the
// separating region), evaluates the sufficient condition
//   H_max R(W)^{2(2-p)/(3-p)} <= 2 (4pi L^p / vol)^{1/(3-p)} a^{(p-1)/(3-p)}
// which certifies m > 0. Requires H_max >= 0 (theorem hypothesis).
struct RegionSpec {
  double vol = 0.0;
  double L = 0.0;
  std::optional<double> C_p_omega;  // exact separating capacity, if known
};

struct HmaxReport {
  InequalityResult mass_bound;              // the 2 <= ... inequality
  std::optional<InequalityResult> localized;  // region condition, when supplied
  bool certifies_positive_mass = false;
};

HmaxReport hmax_bounds(const BoundaryData& bd, double mass,
                       const std::optional<RegionSpec>& region = std::nullopt);

// C_p along a decreasing p-sequence -> 1, extrapolated to p = 1 with the
// q log q corrected fit in q = p - 1. The limit is the boundary area for
// area outer-minimizing boundaries.
struct CapacityLimit {
  std::vector<double> p_values, C_values;
  double extrapolated = 0.0;
  double boundary_area = 0.0;  // 4 pi r_min^2
};

CapacityLimit capacity_p_limit(const RadialMetric& g,
                               const std::vector<double>& p_sequence);

}  // namespace pharm
