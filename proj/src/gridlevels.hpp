#pragma once

#include "grid.hpp"
#include "levelsurf.hpp"

namespace pharm {

// Node arrays of first and second derivative data for a solved field,
// computed once and shared by all level extractions:
//   v_xi, v_th   coordinate derivatives (centered; one-sided at rims)
//   grad         |\nabla v| in the metric, sqrt((v_xi/phi_eff)^2 + (v_th/r)^2)
//   lap          Laplace-Beltrami of v, divergence form
//                (1/(phi_eff r^2)) d_xi(r^2 v_xi / phi_eff)
//                + (1/(r^2 sin)) d_th(sin v_th), with the symmetric limit
//                2 v_thth / r^2 on the axis rows
//   vnn          second normal derivative (\nabla v . \nabla|\nabla v|)/|\nabla v|
struct GridDerivatives {
  std::vector<double> v_xi, v_th, grad, lap, vnn;
};

GridDerivatives grid_derivatives(const GridField& f);

// Extracts the contour {v = value} by marching squares on the (xi, theta)
// section, chains the cell segments into a single axis-to-axis meridian
// polyline, and revolves it with metric area weights. Surface data:
//   H        = (lap - vnn) / |\nabla v| at contour vertices
//   int_K    from the revolved surface's Gauss curvature -R''/R,
//            R = r sin(theta), second differences along arclength
//   int_gradp1 uses the regularized flux integrand
//            (|\nabla v|^2 + eps^2)^{(p-2)/2} |\nabla v|
// The t field of the result is NaN; callers that know the level
// parametrization use the overload below.
// Throws when the value lies outside the open boundary-data range, when no
// contour exists, or when the contour is degenerate (does not join the two
// axis endpoints, or leaves more than 2% of the cell segments unchained).
LevelSurfaceData extract_level_value(const GridField& f,
                                     const GridDerivatives& d, double value);

// Level parametrized as in the radial module: value = 1 - c t^{-a}.
LevelSurfaceData extract_level(const GridField& f, const GridDerivatives& d,
                               double t, double a, double c);

}  // namespace pharm
