#pragma once

#include "geometry.hpp"

#include <string>
#include <vector>

namespace pharm {

// Structured axisymmetric grid on the annulus {r_min <= r <= r_out},
// coordinates (xi, theta) with xi in [0,1], theta in [0,pi].
// The radial map depends on the inner boundary:
//   log_radius     r(xi) = r_min (r_out/r_min)^xi, used away from a horizon;
//                  power-law potentials have bounded derivatives in xi, so
//                  stencils keep uniform accuracy down to the inner rim.
//   horizon_power  r(xi) = r_min + (r_out - r_min) xi^2, used when
//                  phi(r_min) is infinite; the 1-D measure factor
//                  phi_eff = phi(r) dr/dxi then stays finite at xi = 0.
// Geometry is sampled once at nodes and at the 2x2 Gauss points of every
// cell, so the energy kernels never touch phi near its singularity.
enum class GridMap { log_radius, horizon_power };

struct AnnulusGrid {
  RadialMetric metric;
  int n_xi = 0, n_theta = 0;  // node counts per axis
  double r_out = 0.0;
  GridMap map = GridMap::log_radius;
  double dxi = 0.0, dtheta = 0.0;

  std::vector<double> xi, theta;       // node coordinates
  std::vector<double> r_node;          // r(xi_i)
  std::vector<double> phi_eff_node;    // phi(r) dr/dxi at nodes (limit at 0)
  // Gauss data: two points per cell along each axis
  std::vector<double> xi_g, r_g, phi_eff_g;  // [2*i + a] for xi-cell i
  std::vector<double> theta_g, sin_g;        // [2*j + b] for theta-cell j

  int node(int i, int j) const { return i * n_theta + j; }
  int n_nodes() const { return n_xi * n_theta; }
  int n_cells() const { return (n_xi - 1) * (n_theta - 1); }
  double r_of_xi(double x) const;
  double phi_eff_of_xi(double x) const;
};

AnnulusGrid make_annulus_grid(const RadialMetric& g, int n_xi, int n_theta,
                              double r_out);

// Field of node values with Dirichlet data on both radial rims.
struct GridField {
  AnnulusGrid grid;
  double p = 2.0;
  double eps = 0.0;
  double bc_inner = 0.0, bc_outer = 1.0;
  std::vector<double> v;

  double energy = 0.0;           // final E_eps
  int newton_iters = 0;
  double final_grad_norm = 0.0;  // sup-norm over interior nodes
};

// Discrete energy E_eps(v) = (1/p) \int (|grad v|^2 + eps^2)^{p/2} dV on
// bilinear cells with 2x2 Gauss quadrature and metric volume weights, and
// its exact derivative with respect to node values. Entries of grad at
// boundary nodes (xi rims) are set to zero. Requires 1 < p <= 2 and
// eps >= 0, with eps = 0 admitted only for p = 2.
// The parallel version assembles per-cell contributions concurrently and
// reduces them in a fixed order, so results are byte-identical to the
// serial reference at any thread count.
double energy_and_gradient(const AnnulusGrid& grid,
                           const std::vector<double>& values, double p,
                           double eps, std::vector<double>& grad);
double energy_and_gradient_serial(const AnnulusGrid& grid,
                                  const std::vector<double>& values, double p,
                                  double eps, std::vector<double>& grad);

struct SolveOptions {
  int max_newton = 80;           // per continuation stage
  double grad_tol_factor = 1e-9; // tolerance = factor * |bc spread|
  double eps_start = 0.25;       // continuation entry point for p < 2
  bool verbose = false;
};

// Minimizes E_eps over interior node values with the boundary data held
// fixed, by damped Newton with Armijo backtracking. For p < 2 the solve
// walks a geometric eps ladder (eps_start, eps_start/2, ...) down to the
// requested eps, warm-starting each stage. Equal boundary values return
// the constant field immediately. Throws on non-convergence, reporting
// the final gradient norm.
GridField solve_regularized(const AnnulusGrid& grid, double p, double eps,
                            double bc_inner, double bc_outer,
                            const SolveOptions& opts = {});

// C_{p,eps} = \int_{inner rim} (|grad v|^2 + eps^2)^{(p-2)/2} |grad v| dA
// with the normal derivative from a one-sided second-order stencil in xi
// and trapezoidal area weights in theta.
double regularized_capacity(const GridField& f);

// Flux of the same integrand through the coordinate sphere xi = xi_i
// (centered stencils); used for interior flux-constancy checks.
double coordinate_flux(const GridField& f, int i);

// Round-trip document for a solved field: metric parameters, grid shape,
// (p, eps, bc) and node values. Loading rebuilds the grid and
// cross-checks the stored energy against a fresh evaluation.
std::string field_to_json(const GridField& f);
GridField field_from_json(const std::string& text);

}  // namespace pharm
