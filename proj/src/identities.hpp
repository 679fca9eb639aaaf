#pragma once

#include "radial.hpp"

#include <utility>

namespace pharm {

// A positive radial field w solving the one-parameter boundary system
//   Delta w = alpha * Hess w(nu, nu) + 2 |grad w|^2 / w,   alpha in [-1, 1],
// on an annulus of a RadialMetric. Sources:
//  - transform_field: w = ((1-u)/c)^{-1/a} from a p-harmonic potential,
//    which solves the system with alpha = 2 - p and satisfies w = t on the
//    level surface with parameter t;
//  - imcf_solution: w = r, which solves the alpha = 1 (inverse mean
//    curvature flow) system in any radial metric.
// beta is the weight exponent of the divergence identity, restricted to
// {0, 2/(1-alpha)} (beta = 1 is a pole of the identity).
struct BvpSolution {
  RadialMetric metric;
  double alpha = 0.0;
  double beta = 0.0;
  double r_lo = 0.0, r_hi = 0.0;  // sampling annulus

  double w(double r) const;
  double dw(double r) const;
  double d2w(double r) const;
  double grad(double r) const;  // |grad w| = w'/phi
  // unique r with w(r) = t
  double radius_of_level(double t) const;

  // underlying potential data (transform mode); unused for imcf mode
  bool has_pot = false;
  RadialPotential pot;
};

// Construction verifies the system residual
//   Delta w - alpha w_nunu - 2 |grad w|^2 / w
// at 100 sampled radii and refuses (throws) beyond 1e-6.
BvpSolution transform_field(const RadialPotential& pot);
BvpSolution transform_field(const RadialPotential& pot, double beta);
BvpSolution imcf_solution(const RadialMetric& g, double r_lo, double r_hi);

double system_residual(const BvpSolution& sol, double r);

// Master divergence identity for a solution w of the alpha-system:
//   w^{-beta} (R_alpha(w) - 2 K |grad w|) = div(w^{-beta} X)
// with
//   R_alpha = S |grad w| + (|T|^2 - alpha^2 w_nunu^2) / |grad w|,
//   T = Hess w + w^{-1} (dw x dw - |grad w|^2 g),
//   X = 2 (grad|grad w| - Delta w grad w/|grad w|
//          + ((2 beta - 1)/(beta - 1)) |grad w| grad w / w).
// Pointwise: |LHS - RHS| at radius r, the divergence evaluated by a 5-point
// derivative of the exact flux r^2 w^{-beta} X.nu. Integrated over the region
// between the levels {w = t1} and {w = t2}:
//   (1/2) \int w^{-beta} R_alpha dV
//     = 2 pi chi \int_{t1}^{t2} t^{-beta} dt
//       + [ 4 pi r^2 w^{-beta} (-H |grad w|
//           + ((2 beta - 1)/(beta - 1)) |grad w|^2 / w) ]_{t1}^{t2},
// with chi = 2 (spherical levels).
double identity_check_pointwise(const BvpSolution& sol, double r);
double identity_check_integrated(const BvpSolution& sol, double t1, double t2);

// R_alpha - S |grad w| at radius r (nonnegative whenever alpha^2 <= 1).
double r_alpha_excess(const BvpSolution& sol, double r);

// Constant-Hawking-mass radial metric
//   g = (chi/2 - m_H / rho)^{-1} drho^2 + rho^2 (round sphere),
// emitted as a profile table on [rho_lo, rho_hi]; chi must be 2. The Hawking
// mass of every coordinate sphere equals m_H / 2 (so m_H = 2 reproduces the
// schwarzschild metric of mass 1). m_H = 0 gives the euclidean metric.
RadialMetric rigidity_metric(double m_H, int chi, double rho_lo, double rho_hi);

// Level quantities computed through the substitution U = (1-p) log(1-u) with
// level parameter tau = (1-p) log(c t^{-a}):
//   B_alt = 4 pi c^{1/a} e^{tau/(3-p)}
//           [1 - (1/(4pi(3-p)^2)) \int (H + (p-1) U_nunu / |grad U|)^2]
//   A_alt = 8 pi c^{1/a} e^{tau/(3-p)}
//           [1 - (1/(8pi(3-p))) \int H (H + (p-1) U_nunu / |grad U|)]
// These must agree with the monotone-module B(t), A(t).
std::pair<double, double> ba_via_substitution(const RadialPotential& pot,
                                              double t);

}  // namespace pharm
