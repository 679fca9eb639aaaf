#pragma once

#include "radial.hpp"

namespace pharm {

// Geometric integrals over one level surface {u = f(t)}.
struct LevelSurfaceData {
  double t = 0.0;          // level parameter
  double s = 0.0;          // potential value f(t)
  double area = 0.0;
  double int_gradp1 = 0.0;  // \int |grad u|^{p-1}  (the capacity flux)
  double int_grad2 = 0.0;   // \int |grad u|^2
  double int_gradH = 0.0;   // \int |grad u| H
  double int_H2 = 0.0;      // \int H^2
  double int_K = 0.0;       // \int K (Gauss curvature of the surface)
  double min_grad = 0.0;
  bool regular = false;
};

// Radial sources: closed-form sphere data at r = level_radius(t).
LevelSurfaceData extract_level(const RadialPotential& pot, double t);

// Evolution identities of the level-set flow with speed 1/|grad u|, at the
// potential value tau, probed by central differences with step h:
//   residual1 = | FD_h(\int |grad u|^2) - \int (2 du_Lap - |grad u| H) |
//   gap2      = \int (K - (3/4) H^2 + H du_Lap / |grad u|) - FD_h(\int |grad u| H)
// where du_Lap = Delta u = ((2-p)/(1-p)) |grad u| H for a p-harmonic u.
// gap2 equals (1/2) \int_Sigma S dA >= 0 when the ambient scalar curvature
// S is nonnegative (it is exactly 0 on the flat and schwarzschild models).
struct EvolutionResiduals {
  double residual1 = 0.0;
  double gap2 = 0.0;
};

EvolutionResiduals evolution_check(const RadialPotential& pot, double tau,
                                   double h);

// CSV with header t,s,area,int_gradp1,int_grad2,int_gradH,int_H2,int_K,min_grad,regular
std::string level_rows_to_csv(const std::vector<LevelSurfaceData>& rows);

}  // namespace pharm
