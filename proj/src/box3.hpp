#pragma once
// Low-resolution 3-D mode: cube lattice on [-L, L]^3 with an excised ball,
// for verification runs without rotational symmetry.  The axisymmetric
// annulus solver in grid.hpp is the precision instrument; this one trades
// boundary accuracy (the ball is resolved by a lattice staircase, an O(h)
// effect) for fully generic geometry.

#include "geometry.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace pharm {

// node kinds for the Dirichlet classification
enum class Box3Node : std::uint8_t { free_node = 0, inner_bc = 1, outer_bc = 2 };

struct Box3Grid {
  RadialMetric metric;   // radial factor about the ball center; euclidean for flat runs
  int n = 0;             // nodes per axis
  double L = 0.0;        // half-width of the box
  double r_min = 0.0;    // excised ball radius
  std::array<double, 3> center{0.0, 0.0, 0.0};  // ball center (box stays centered)
  double h = 0.0;        // lattice spacing 2L/(n-1)

  std::vector<Box3Node> kind;      // per node
  std::vector<double> phi_node;    // metric factor at the node radius (clamped to r_min)
  std::vector<std::uint8_t> cell_included;  // per cube, 0 when all corners sit in the ball

  long node(int ix, int iy, int iz) const {
    return (static_cast<long>(ix) * n + iy) * n + iz;
  }
  long n_nodes() const { return static_cast<long>(n) * n * n; }
  long n_cells() const { return static_cast<long>(n - 1) * (n - 1) * (n - 1); }
  double coord(int i) const { return -L + h * i; }
  // radius about the ball center
  double radius(int ix, int iy, int iz) const;
};

// throws when the ball does not fit with a free layer inside the box, or the
// metric is singular at r_min (excise strictly outside a horizon instead)
Box3Grid make_box3_grid(const RadialMetric& metric, int n, double L, double r_min,
                        std::array<double, 3> center = {0.0, 0.0, 0.0});

struct Box3Field {
  Box3Grid grid;
  double p = 2.0;
  double eps = 0.0;
  double bc_inner = 0.0;
  double bc_outer = 1.0;  // scale only; face nodes carry the radial trace, see solve
  std::vector<double> v;

  double energy = 0.0;
  int newton_iters = 0;
  double final_grad_norm = 0.0;
};

// energy of the lattice field over the included tetrahedra; fills the exact
// gradient with boundary entries zeroed.  The parallel version reduces over
// cells and must agree bitwise with the serial one.
double box3_energy_and_gradient(const Box3Grid& grid, const std::vector<double>& v,
                                double p, double eps, std::vector<double>& grad);
double box3_energy_and_gradient_serial(const Box3Grid& grid, const std::vector<double>& v,
                                       double p, double eps, std::vector<double>& grad);

struct Box3SolveOptions {
  int max_newton = 80;
  double grad_tol_factor = 1e-9;  // times the boundary value spread
  double eps_start = 0.25;
  bool verbose = false;
};

// minimizes the regularized energy with inner value bc_inner on the ball
// staircase and the exact radial trace bc_inner + spread * (1 - c t^-a)
// evaluated at each face node radius when (a, c) are given; with a <= 0 the
// faces take the constant bc_outer instead
Box3Field solve_regularized_box3(const Box3Grid& grid, double p, double eps,
                                 double bc_inner, double bc_outer,
                                 double trace_a = -1.0, double trace_c = 0.0,
                                 const Box3SolveOptions& opts = {});

// marching tetrahedra on the included tets; vertices deduplicated by lattice
// edge so the triangulation is watertight wherever the level set stays off
// the box faces
struct Box3Surface {
  double value = 0.0;
  bool closed = false;   // no triangle vertex on a box face
  long n_triangles = 0;
  long n_vertices = 0;
  double area = 0.0;
  double int_gradp1 = 0.0;  // int (|grad v|^2 + eps^2)^{p/2 - 1} |grad v| dA
  double int_grad2 = 0.0;
  double int_gradH = 0.0;
  double int_H2 = 0.0;
  double int_K = 0.0;       // angle defect sum; 4 pi exactly for a closed genus-0 mesh
  double min_grad = 0.0;
};

// flat-metric surface extraction (the curved-metric surface measure is not
// implemented in box mode); H comes from centered lattice stencils via
// (lap v - v_nn) / |grad v| interpolated to the crossing points
Box3Surface extract_level_box3(const Box3Field& f, double value);

std::string box3_field_to_json(const Box3Field& f);
Box3Field box3_field_from_json(const std::string& text);

}  // namespace pharm
