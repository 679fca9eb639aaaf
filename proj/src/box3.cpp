#include "box3.hpp"

#include "num.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>

namespace pharm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Kuhn subdivision of the unit cube into 6 tetrahedra sharing the main
// diagonal. Local corner id is ix + 2 iy + 4 iz. For an axis permutation
// (a, b, c) the tet walks 0 -> +e_a -> +e_b -> +e_c, so the P1 gradient in
// global axes is just the successive value differences over h. The same
// diagonal orientation in every cube makes the triangulation conforming.
struct KuhnTet {
  int axis[3];   // global axis of each walk step
  int local[4];  // corner ids along the walk
};

constexpr int kAxisBit[3] = {1, 2, 4};

const std::array<KuhnTet, 6>& kuhn_tets() {
  static const std::array<KuhnTet, 6> tets = [] {
    std::array<KuhnTet, 6> out{};
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                             {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int t = 0; t < 6; ++t) {
      const int* s = perms[t];
      out[t].axis[0] = s[0];
      out[t].axis[1] = s[1];
      out[t].axis[2] = s[2];
      out[t].local[0] = 0;
      out[t].local[1] = kAxisBit[s[0]];
      out[t].local[2] = kAxisBit[s[0]] + kAxisBit[s[1]];
      out[t].local[3] = 7;
    }
    return out;
  }();
  return tets;
}

const int kCornerOff[8][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                              {0, 0, 1}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1}};

}  // namespace

double Box3Grid::radius(int ix, int iy, int iz) const {
  double dx = coord(ix) - center[0];
  double dy = coord(iy) - center[1];
  double dz = coord(iz) - center[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Box3Grid make_box3_grid(const RadialMetric& metric, int n, double L, double r_min,
                        std::array<double, 3> center) {
  if (n < 5) throw std::invalid_argument("box3 grid: need at least 5 nodes per axis");
  if (!(L > 0.0) || !(r_min > 0.0))
    throw std::invalid_argument("box3 grid: L and r_min must be positive");
  if (r_min < metric.r_min - 1e-12)
    throw std::invalid_argument("box3 grid: excised ball smaller than the metric domain");
  if (metric.singular_at_rmin() && r_min <= metric.r_min)
    throw std::invalid_argument(
        "box3 grid: metric singular at r_min; excise strictly outside the horizon");

  Box3Grid g;
  g.metric = metric;
  g.n = n;
  g.L = L;
  g.r_min = r_min;
  g.center = center;
  g.h = 2.0 * L / (n - 1);

  // the ball must sit inside the box with at least two free layers
  double reach = r_min + std::max({std::fabs(center[0]), std::fabs(center[1]),
                                   std::fabs(center[2])});
  if (reach + 2.0 * g.h >= L)
    throw std::invalid_argument("box3 grid: ball too close to the box faces");

  g.kind.assign(g.n_nodes(), Box3Node::free_node);
  g.phi_node.assign(g.n_nodes(), 1.0);
  long n_inner = 0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        long id = g.node(ix, iy, iz);
        double r = g.radius(ix, iy, iz);
        g.phi_node[id] = metric.phi(std::max(r, r_min));
        if (r <= r_min) {
          g.kind[id] = Box3Node::inner_bc;
          ++n_inner;
        } else if (ix == 0 || iy == 0 || iz == 0 || ix == n - 1 || iy == n - 1 ||
                   iz == n - 1) {
          g.kind[id] = Box3Node::outer_bc;
        }
        if (!(g.phi_node[id] > 0.0) || !std::isfinite(g.phi_node[id]))
          throw std::invalid_argument("box3 grid: metric factor not positive at a node");
      }
  if (n_inner == 0)
    throw std::invalid_argument("box3 grid: lattice too coarse, no node inside the ball");

  long nc1 = n - 1;
  g.cell_included.assign(g.n_cells(), 1);
  for (int ix = 0; ix < nc1; ++ix)
    for (int iy = 0; iy < nc1; ++iy)
      for (int iz = 0; iz < nc1; ++iz) {
        bool all_inside = true;
        for (const auto& off : kCornerOff)
          if (g.kind[g.node(ix + off[0], iy + off[1], iz + off[2])] !=
              Box3Node::inner_bc) {
            all_inside = false;
            break;
          }
        if (all_inside)
          g.cell_included[(static_cast<long>(ix) * nc1 + iy) * nc1 + iz] = 0;
      }
  return g;
}

namespace {

void check_box3_args(const Box3Grid& grid, const std::vector<double>& v, double p,
                     double eps) {
  if (!(p > 1.0 && p <= 2.0))
    throw std::invalid_argument("box3 energy: need 1 < p <= 2");
  if (eps < 0.0) throw std::invalid_argument("box3 energy: eps must be nonnegative");
  if (eps == 0.0 && p < 2.0)
    throw std::invalid_argument("box3 energy: eps = 0 makes the energy non-smooth for p < 2");
  if (static_cast<long>(v.size()) != grid.n_nodes())
    throw std::invalid_argument("box3 energy: value array does not match the grid");
}

struct TetGeom {
  double w;        // metric volume weight phi(r_c) h^3 / 6
  double anis;     // phi^{-2} - 1 at the centroid
  double xhat[3];  // unit radial direction at the centroid
};

// metric data at the six tet centroids of the cell at (ix, iy, iz)
void cell_tet_geometry(const Box3Grid& g, int ix, int iy, int iz, TetGeom out[6]) {
  const auto& tets = kuhn_tets();
  double base = g.h * g.h * g.h / 6.0;
  for (int t = 0; t < 6; ++t) {
    double cx = 0.0, cy = 0.0, cz = 0.0;
    for (int k = 0; k < 4; ++k) {
      const int* off = kCornerOff[tets[t].local[k]];
      cx += g.coord(ix + off[0]);
      cy += g.coord(iy + off[1]);
      cz += g.coord(iz + off[2]);
    }
    cx = 0.25 * cx - g.center[0];
    cy = 0.25 * cy - g.center[1];
    cz = 0.25 * cz - g.center[2];
    double r = std::sqrt(cx * cx + cy * cy + cz * cz);
    // crossing tets may dip slightly inside the ball; clamp the metric argument
    double phi = g.metric.phi(std::max(r, g.r_min));
    out[t].w = phi * base;
    out[t].anis = 1.0 / (phi * phi) - 1.0;
    out[t].xhat[0] = cx / r;
    out[t].xhat[1] = cy / r;
    out[t].xhat[2] = cz / r;
  }
}

// energy and value-gradient of one cell given its 8 corner values
double cell_energy_grad_box3(const Box3Grid& g, const TetGeom geom[6],
                             const double vc[8], double p, double eps, double g8[8]) {
  const auto& tets = kuhn_tets();
  double inv_h = 1.0 / g.h;
  double e2 = eps * eps;
  double E = 0.0;
  for (int k = 0; k < 8; ++k) g8[k] = 0.0;
  for (int t = 0; t < 6; ++t) {
    const KuhnTet& T = tets[t];
    double v0 = vc[T.local[0]], v1 = vc[T.local[1]];
    double v2 = vc[T.local[2]], v3 = vc[T.local[3]];
    double d[3];  // gradient components ordered by the walk steps
    d[0] = (v1 - v0) * inv_h;
    d[1] = (v2 - v1) * inv_h;
    d[2] = (v3 - v2) * inv_h;
    // z = g^{-1} grad with g^{ij} = delta + (phi^{-2} - 1) xhat xhat
    double xh[3] = {geom[t].xhat[T.axis[0]], geom[t].xhat[T.axis[1]],
                    geom[t].xhat[T.axis[2]]};
    double rad = xh[0] * d[0] + xh[1] * d[1] + xh[2] * d[2];
    double z[3];
    for (int k = 0; k < 3; ++k) z[k] = d[k] + geom[t].anis * rad * xh[k];
    double S = d[0] * z[0] + d[1] * z[1] + d[2] * z[2] + e2;
    double w = geom[t].w;
    E += (w / p) * std::pow(S, 0.5 * p);
    double q = w * std::pow(S, 0.5 * p - 1.0) * inv_h;
    g8[T.local[0]] -= q * z[0];
    g8[T.local[1]] += q * (z[0] - z[1]);
    g8[T.local[2]] += q * (z[1] - z[2]);
    g8[T.local[3]] += q * z[2];
  }
  return E;
}

void gather_cell_values(const Box3Grid& g, int ix, int iy, int iz, const std::vector<double>& v,
                        double vc[8], long ids[8]) {
  for (int k = 0; k < 8; ++k) {
    const int* off = kCornerOff[k];
    ids[k] = g.node(ix + off[0], iy + off[1], iz + off[2]);
    vc[k] = v[ids[k]];
  }
}

void zero_boundary_box3(const Box3Grid& g, std::vector<double>& grad) {
  for (long id = 0; id < g.n_nodes(); ++id)
    if (g.kind[id] != Box3Node::free_node) grad[id] = 0.0;
}

}  // namespace

double box3_energy_and_gradient_serial(const Box3Grid& grid, const std::vector<double>& v,
                                       double p, double eps, std::vector<double>& grad) {
  check_box3_args(grid, v, p, eps);
  grad.assign(grid.n_nodes(), 0.0);
  int nc1 = grid.n - 1;
  double E = 0.0;
  TetGeom geom[6];
  double vc[8], g8[8];
  long ids[8];
  for (int ix = 0; ix < nc1; ++ix)
    for (int iy = 0; iy < nc1; ++iy)
      for (int iz = 0; iz < nc1; ++iz) {
        if (!grid.cell_included[(static_cast<long>(ix) * nc1 + iy) * nc1 + iz]) continue;
        cell_tet_geometry(grid, ix, iy, iz, geom);
        gather_cell_values(grid, ix, iy, iz, v, vc, ids);
        E += cell_energy_grad_box3(grid, geom, vc, p, eps, g8);
        for (int k = 0; k < 8; ++k) grad[ids[k]] += g8[k];
      }
  zero_boundary_box3(grid, grad);
  return E;
}

double box3_energy_and_gradient(const Box3Grid& grid, const std::vector<double>& v,
                                double p, double eps, std::vector<double>& grad) {
  check_box3_args(grid, v, p, eps);
  long nc1 = grid.n - 1;
  long ncells = grid.n_cells();
  // parallel pass into per-cell storage, then a serial gather in fixed cell
  // order so the result is bitwise identical to the serial version
  std::vector<double> cell_E(ncells, 0.0);
  std::vector<std::array<double, 8>> cell_g(ncells);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < ncells; ++c) {
    if (!grid.cell_included[c]) continue;
    int ix = static_cast<int>(c / (nc1 * nc1));
    int iy = static_cast<int>((c / nc1) % nc1);
    int iz = static_cast<int>(c % nc1);
    TetGeom geom[6];
    double vc[8], g8[8];
    long ids[8];
    cell_tet_geometry(grid, ix, iy, iz, geom);
    gather_cell_values(grid, ix, iy, iz, v, vc, ids);
    cell_E[c] = cell_energy_grad_box3(grid, geom, vc, p, eps, g8);
    for (int k = 0; k < 8; ++k) cell_g[c][k] = g8[k];
  }
  grad.assign(grid.n_nodes(), 0.0);
  double E = 0.0;
  long ids[8];
  double vc[8];
  for (long c = 0; c < ncells; ++c) {
    if (!grid.cell_included[c]) continue;
    int ix = static_cast<int>(c / (nc1 * nc1));
    int iy = static_cast<int>((c / nc1) % nc1);
    int iz = static_cast<int>(c % nc1);
    gather_cell_values(grid, ix, iy, iz, v, vc, ids);
    E += cell_E[c];
    for (int k = 0; k < 8; ++k) grad[ids[k]] += cell_g[c][k];
  }
  zero_boundary_box3(grid, grad);
  return E;
}

namespace {

// Newton Hessian over the free nodes. Per tet the second derivative of
// (1/p) S^{p/2} in the gradient is S^{p/2-2} ((p-2) z z^T + S A) with
// z = A d, positive definite for p > 1 by Cauchy-Schwarz in the A inner
// product.
void assemble_hessian_box3(const Box3Grid& grid, const std::vector<double>& v, double p,
                           double eps, const std::vector<long>& dof,
                           Eigen::SparseMatrix<double>& H) {
  const auto& tets = kuhn_tets();
  int nc1 = grid.n - 1;
  double inv_h = 1.0 / grid.h;
  double e2 = eps * eps;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid.n_cells() * 40);
  TetGeom geom[6];
  double vc[8];
  long ids[8];
  for (int ix = 0; ix < nc1; ++ix)
    for (int iy = 0; iy < nc1; ++iy)
      for (int iz = 0; iz < nc1; ++iz) {
        if (!grid.cell_included[(static_cast<long>(ix) * nc1 + iy) * nc1 + iz]) continue;
        cell_tet_geometry(grid, ix, iy, iz, geom);
        gather_cell_values(grid, ix, iy, iz, v, vc, ids);
        for (int t = 0; t < 6; ++t) {
          const KuhnTet& T = tets[t];
          double d[3];
          d[0] = (vc[T.local[1]] - vc[T.local[0]]) * inv_h;
          d[1] = (vc[T.local[2]] - vc[T.local[1]]) * inv_h;
          d[2] = (vc[T.local[3]] - vc[T.local[2]]) * inv_h;
          double xh[3] = {geom[t].xhat[T.axis[0]], geom[t].xhat[T.axis[1]],
                          geom[t].xhat[T.axis[2]]};
          double rad = xh[0] * d[0] + xh[1] * d[1] + xh[2] * d[2];
          double z[3];
          for (int k = 0; k < 3; ++k) z[k] = d[k] + geom[t].anis * rad * xh[k];
          double S = d[0] * z[0] + d[1] * z[1] + d[2] * z[2] + e2;
          // at p = 2 the curvature term vanishes identically; skip the power,
          // which would produce inf * 0 on tets with exactly constant values
          double c1 = (p == 2.0) ? 0.0
                                 : geom[t].w * std::pow(S, 0.5 * p - 2.0) * (p - 2.0);
          double c2 = geom[t].w * std::pow(S, 0.5 * p - 1.0);
          double M[3][3];
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              double A_ab = (a == b ? 1.0 : 0.0) + geom[t].anis * xh[a] * xh[b];
              M[a][b] = c1 * z[a] * z[b] + c2 * A_ab;
            }
          // B maps the 4 vertex values to d: row k has -1/h at vertex k and
          // +1/h at vertex k+1 along the walk
          double Bv[3][4] = {{-inv_h, inv_h, 0.0, 0.0},
                             {0.0, -inv_h, inv_h, 0.0},
                             {0.0, 0.0, -inv_h, inv_h}};
          for (int i = 0; i < 4; ++i) {
            long di = dof[ids[T.local[i]]];
            if (di < 0) continue;
            double Mu[3];
            for (int a = 0; a < 3; ++a)
              Mu[a] = M[a][0] * Bv[0][i] + M[a][1] * Bv[1][i] + M[a][2] * Bv[2][i];
            for (int j = 0; j < 4; ++j) {
              long dj = dof[ids[T.local[j]]];
              if (dj < 0) continue;
              double hij = Bv[0][j] * Mu[0] + Bv[1][j] * Mu[1] + Bv[2][j] * Mu[2];
              trip.emplace_back(di, dj, hij);
            }
          }
        }
      }
  H.setFromTriplets(trip.begin(), trip.end());
}

double sup_norm_free(const Box3Grid& g, const std::vector<double>& grad) {
  double m = 0.0;
  for (long id = 0; id < g.n_nodes(); ++id)
    if (g.kind[id] == Box3Node::free_node) m = std::max(m, std::fabs(grad[id]));
  return m;
}

// one Newton descent run at fixed eps; returns false on a stall
bool newton_stage_box3(const Box3Grid& grid, std::vector<double>& v, double p, double eps,
                       double tol, const Box3SolveOptions& opts, int& iters,
                       double& E, double& gnorm) {
  std::vector<long> dof(grid.n_nodes(), -1);
  long ndof = 0;
  for (long id = 0; id < grid.n_nodes(); ++id)
    if (grid.kind[id] == Box3Node::free_node) dof[id] = ndof++;

  std::vector<double> grad;
  E = box3_energy_and_gradient(grid, v, p, eps, grad);
  for (int it = 0; it < opts.max_newton; ++it) {
    gnorm = sup_norm_free(grid, grad);
    if (gnorm < tol) {
      iters = it;
      return true;
    }
    Eigen::SparseMatrix<double> H(ndof, ndof);
    assemble_hessian_box3(grid, v, p, eps, dof, H);
    Eigen::VectorXd rhs(ndof);
    for (long id = 0; id < grid.n_nodes(); ++id)
      if (dof[id] >= 0) rhs[dof[id]] = -grad[id];
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IncompleteCholesky<double>>
        cg;
    cg.setTolerance(1e-10);
    cg.setMaxIterations(10000);
    cg.compute(H);
    Eigen::VectorXd delta = cg.solve(rhs);
    if (opts.verbose)
      std::fprintf(stderr, "box3 newton %d: E=%.12g gnorm=%.3g cg_info=%d cg_iters=%ld cg_err=%.3g\n",
                   it, E, gnorm, static_cast<int>(cg.info()),
                   static_cast<long>(cg.iterations()), cg.error());
    double slope = 0.0;
    bool usable = cg.info() == Eigen::Success;
    if (usable) {
      for (long id = 0; id < grid.n_nodes(); ++id)
        if (dof[id] >= 0) slope += grad[id] * delta[dof[id]];
      usable = slope < 0.0;
    }
    if (!usable) {
      // steepest descent fallback scaled to the current values
      double scale = 0.0;
      for (double x : v) scale = std::max(scale, std::fabs(x));
      for (long id = 0; id < grid.n_nodes(); ++id)
        if (dof[id] >= 0) delta[dof[id]] = -grad[id];
      double dn = delta.cwiseAbs().maxCoeff();
      if (dn > 0.0) delta *= (0.1 * (scale + 1.0) / dn);
      slope = 0.0;
      for (long id = 0; id < grid.n_nodes(); ++id)
        if (dof[id] >= 0) slope += grad[id] * delta[dof[id]];
      if (slope >= 0.0) {
        iters = it;
        return false;
      }
    }
    // Armijo backtracking with a small floor for roundoff near the minimum
    double step = 1.0;
    bool accepted = false;
    std::vector<double> v_try(v.size());
    std::vector<double> grad_try;
    for (int halvings = 0; halvings < 30; ++halvings) {
      v_try = v;
      for (long id = 0; id < grid.n_nodes(); ++id)
        if (dof[id] >= 0) v_try[id] += step * delta[dof[id]];
      double E_try = box3_energy_and_gradient(grid, v_try, p, eps, grad_try);
      if (E_try <= E + 1e-4 * step * slope + 1e-14 * (std::fabs(E) + 1.0)) {
        v.swap(v_try);
        grad.swap(grad_try);
        E = E_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      iters = it;
      gnorm = sup_norm_free(grid, grad);
      return gnorm < tol;
    }
  }
  gnorm = sup_norm_free(grid, grad);
  iters = opts.max_newton;
  return gnorm < tol;
}

}  // namespace

Box3Field solve_regularized_box3(const Box3Grid& grid, double p, double eps,
                                 double bc_inner, double bc_outer, double trace_a,
                                 double trace_c, const Box3SolveOptions& opts) {
  {
    std::vector<double> probe(grid.n_nodes(), bc_inner);
    std::vector<double> unused;
    box3_energy_and_gradient(grid, probe, p, eps, unused);  // argument validation
  }
  Box3Field f;
  f.grid = grid;
  f.p = p;
  f.eps = eps;
  f.bc_inner = bc_inner;
  f.bc_outer = bc_outer;
  double spread = bc_outer - bc_inner;
  f.v.assign(grid.n_nodes(), bc_inner);

  int n = grid.n;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        long id = grid.node(ix, iy, iz);
        double r = grid.radius(ix, iy, iz);
        if (grid.kind[id] == Box3Node::inner_bc) {
          f.v[id] = bc_inner;
        } else if (grid.kind[id] == Box3Node::outer_bc) {
          f.v[id] = (trace_a > 0.0)
                        ? bc_inner + spread * (1.0 - trace_c * std::pow(r, -trace_a))
                        : bc_outer;
        } else {
          // radial ramp initial guess, clipped to the boundary range
          double s = (r - grid.r_min) / (grid.L - grid.r_min);
          f.v[id] = bc_inner + spread * std::clamp(s, 0.0, 1.0);
        }
      }
  if (spread == 0.0) {
    std::vector<double> grad;
    f.energy = box3_energy_and_gradient(grid, f.v, p, eps, grad);
    f.final_grad_norm = sup_norm_free(grid, grad);
    return f;
  }

  double tol = opts.grad_tol_factor * std::fabs(spread);
  std::vector<double> ladder;
  if (p == 2.0 || eps >= opts.eps_start) {
    ladder.push_back(eps);
  } else {
    for (double e = opts.eps_start; e > eps; e *= 0.5) ladder.push_back(e);
    ladder.push_back(eps);
  }
  for (double e : ladder) {
    int iters = 0;
    double E = 0.0, gn = 0.0;
    bool ok = newton_stage_box3(grid, f.v, p, e, tol, opts, iters, E, gn);
    f.newton_iters += iters;
    f.energy = E;
    f.final_grad_norm = gn;
    if (!ok)
      throw std::runtime_error("box3 solve: Newton stalled at eps = " + fmt_g17(e) +
                               " with gradient norm " + fmt_g17(gn) + " (tolerance " +
                               fmt_g17(tol) + ")");
  }
  return f;
}

namespace {

// centered lattice derivatives of the field; one-sided at the box faces
struct LatticeDerivs {
  std::vector<double> gx, gy, gz, lap, vnn;
};

LatticeDerivs lattice_derivatives(const Box3Field& f) {
  const Box3Grid& g = f.grid;
  int n = g.n;
  double h = g.h;
  LatticeDerivs d;
  d.gx.assign(g.n_nodes(), 0.0);
  d.gy.assign(g.n_nodes(), 0.0);
  d.gz.assign(g.n_nodes(), 0.0);
  d.lap.assign(g.n_nodes(), 0.0);
  d.vnn.assign(g.n_nodes(), 0.0);
  auto val = [&](int ix, int iy, int iz) { return f.v[g.node(ix, iy, iz)]; };
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        long id = g.node(ix, iy, iz);
        int xm = std::max(ix - 1, 0), xp = std::min(ix + 1, n - 1);
        int ym = std::max(iy - 1, 0), yp = std::min(iy + 1, n - 1);
        int zm = std::max(iz - 1, 0), zp = std::min(iz + 1, n - 1);
        // near a face the clamped stencil degrades to one-sided 2-point
        double sx = (xp - xm) * h, sy = (yp - ym) * h, sz = (zp - zm) * h;
        d.gx[id] = (val(xp, iy, iz) - val(xm, iy, iz)) / sx;
        d.gy[id] = (val(ix, yp, iz) - val(ix, ym, iz)) / sy;
        d.gz[id] = (val(ix, iy, zp) - val(ix, iy, zm)) / sz;
        if (ix == 0 || iy == 0 || iz == 0 || ix == n - 1 || iy == n - 1 || iz == n - 1)
          continue;  // second derivatives stay 0 on faces; see the closed check
        double h2 = h * h;
        double wxx = (val(ix + 1, iy, iz) - 2.0 * f.v[id] + val(ix - 1, iy, iz)) / h2;
        double wyy = (val(ix, iy + 1, iz) - 2.0 * f.v[id] + val(ix, iy - 1, iz)) / h2;
        double wzz = (val(ix, iy, iz + 1) - 2.0 * f.v[id] + val(ix, iy, iz - 1)) / h2;
        double wxy = (val(ix + 1, iy + 1, iz) - val(ix + 1, iy - 1, iz) -
                      val(ix - 1, iy + 1, iz) + val(ix - 1, iy - 1, iz)) /
                     (4.0 * h2);
        double wxz = (val(ix + 1, iy, iz + 1) - val(ix + 1, iy, iz - 1) -
                      val(ix - 1, iy, iz + 1) + val(ix - 1, iy, iz - 1)) /
                     (4.0 * h2);
        double wyz = (val(ix, iy + 1, iz + 1) - val(ix, iy + 1, iz - 1) -
                      val(ix, iy - 1, iz + 1) + val(ix, iy - 1, iz - 1)) /
                     (4.0 * h2);
        d.lap[id] = wxx + wyy + wzz;
        double ax = d.gx[id], ay = d.gy[id], az = d.gz[id];
        double m2 = ax * ax + ay * ay + az * az;
        if (m2 > 0.0)
          d.vnn[id] = (ax * (wxx * ax + wxy * ay + wxz * az) +
                       ay * (wxy * ax + wyy * ay + wyz * az) +
                       az * (wxz * ax + wyz * ay + wzz * az)) /
                      m2;
      }
  return d;
}

struct SurfVertex {
  double pos[3];
  double grad[3];
  double lap = 0.0;
  double vnn = 0.0;
  double angle_sum = 0.0;
  bool on_face = false;
};

}  // namespace

Box3Surface extract_level_box3(const Box3Field& f, double value) {
  const Box3Grid& g = f.grid;
  if (g.metric.kind != MetricKind::euclidean)
    throw std::invalid_argument(
        "box3 level extraction: only the flat-metric surface measure is implemented");
  LatticeDerivs der = lattice_derivatives(f);
  const auto& tets = kuhn_tets();
  int n = g.n, nc1 = n - 1;

  std::unordered_map<long long, long> vertex_of_edge;
  std::vector<SurfVertex> verts;
  auto vertex_on_edge = [&](long a, long b) -> long {
    long lo = std::min(a, b), hi = std::max(a, b);
    long long key = lo * static_cast<long long>(g.n_nodes()) + hi;
    auto it = vertex_of_edge.find(key);
    if (it != vertex_of_edge.end()) return it->second;
    double va = f.v[a], vb = f.v[b];
    double lam = (value - va) / (vb - va);
    SurfVertex sv;
    int ai = static_cast<int>(a / (static_cast<long>(n) * n));
    int aj = static_cast<int>((a / n) % n);
    int ak = static_cast<int>(a % n);
    int bi = static_cast<int>(b / (static_cast<long>(n) * n));
    int bj = static_cast<int>((b / n) % n);
    int bk = static_cast<int>(b % n);
    sv.pos[0] = g.coord(ai) + lam * (g.coord(bi) - g.coord(ai));
    sv.pos[1] = g.coord(aj) + lam * (g.coord(bj) - g.coord(aj));
    sv.pos[2] = g.coord(ak) + lam * (g.coord(bk) - g.coord(ak));
    sv.grad[0] = der.gx[a] + lam * (der.gx[b] - der.gx[a]);
    sv.grad[1] = der.gy[a] + lam * (der.gy[b] - der.gy[a]);
    sv.grad[2] = der.gz[a] + lam * (der.gz[b] - der.gz[a]);
    sv.lap = der.lap[a] + lam * (der.lap[b] - der.lap[a]);
    sv.vnn = der.vnn[a] + lam * (der.vnn[b] - der.vnn[a]);
    sv.on_face = g.kind[a] == Box3Node::outer_bc || g.kind[b] == Box3Node::outer_bc;
    long idx = static_cast<long>(verts.size());
    verts.push_back(sv);
    vertex_of_edge.emplace(key, idx);
    return idx;
  };

  Box3Surface out;
  out.value = value;
  double inv_h = 1.0 / g.h;
  double min_grad = std::numeric_limits<double>::infinity();
  std::vector<std::array<long, 3>> tri_ids;
  std::vector<double> tri_gm;  // per-triangle tet gradient magnitude

  long ids[8];
  double vc[8];
  for (int ix = 0; ix < nc1; ++ix)
    for (int iy = 0; iy < nc1; ++iy)
      for (int iz = 0; iz < nc1; ++iz) {
        if (!g.cell_included[(static_cast<long>(ix) * nc1 + iy) * nc1 + iz]) continue;
        gather_cell_values(g, ix, iy, iz, f.v, vc, ids);
        for (int t = 0; t < 6; ++t) {
          const KuhnTet& T = tets[t];
          long q[4] = {ids[T.local[0]], ids[T.local[1]], ids[T.local[2]],
                       ids[T.local[3]]};
          bool above[4];
          int k_above = 0;
          for (int k = 0; k < 4; ++k) {
            above[k] = f.v[q[k]] >= value;
            k_above += above[k];
          }
          if (k_above == 0 || k_above == 4) continue;
          // P1 gradient of this tet (flat metric; successive differences)
          double d[3];
          d[0] = (vc[T.local[1]] - vc[T.local[0]]) * inv_h;
          d[1] = (vc[T.local[2]] - vc[T.local[1]]) * inv_h;
          d[2] = (vc[T.local[3]] - vc[T.local[2]]) * inv_h;
          double gm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
          if (k_above == 1 || k_above == 3) {
            int lone = 0;
            bool want = (k_above == 1);
            for (int k = 0; k < 4; ++k)
              if (above[k] == want) lone = k;
            long tri[3];
            int m = 0;
            for (int k = 0; k < 4; ++k)
              if (k != lone) tri[m++] = vertex_on_edge(q[lone], q[k]);
            tri_ids.push_back({tri[0], tri[1], tri[2]});
            tri_gm.push_back(gm);
          } else {
            int up[2], dn[2];
            int mu = 0, md = 0;
            for (int k = 0; k < 4; ++k)
              (above[k] ? up[mu++] : dn[md++]) = k;
            // quad in cyclic order, split into two triangles
            long v00 = vertex_on_edge(q[up[0]], q[dn[0]]);
            long v01 = vertex_on_edge(q[up[0]], q[dn[1]]);
            long v11 = vertex_on_edge(q[up[1]], q[dn[1]]);
            long v10 = vertex_on_edge(q[up[1]], q[dn[0]]);
            tri_ids.push_back({v00, v01, v11});
            tri_gm.push_back(gm);
            tri_ids.push_back({v00, v11, v10});
            tri_gm.push_back(gm);
          }
          min_grad = std::min(min_grad, gm);
        }
      }

  if (tri_ids.empty())
    throw std::runtime_error("box3 level extraction: no surface at value " +
                             fmt_g17(value));

  bool touches_face = false;
  for (const auto& sv : verts) touches_face |= sv.on_face;

  for (size_t tnum = 0; tnum < tri_ids.size(); ++tnum) {
    const auto& tri = tri_ids[tnum];
    const SurfVertex& A = verts[tri[0]];
    const SurfVertex& B = verts[tri[1]];
    const SurfVertex& C = verts[tri[2]];
    double ab[3], ac[3], bc[3];
    for (int k = 0; k < 3; ++k) {
      ab[k] = B.pos[k] - A.pos[k];
      ac[k] = C.pos[k] - A.pos[k];
      bc[k] = C.pos[k] - B.pos[k];
    }
    double cr[3] = {ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
                    ab[0] * ac[1] - ab[1] * ac[0]};
    double area = 0.5 * std::sqrt(cr[0] * cr[0] + cr[1] * cr[1] + cr[2] * cr[2]);
    if (area == 0.0) continue;  // degenerate sliver from a vertex exactly on the level
    // interior angles for the defect sums
    auto norm3 = [](const double* x) {
      return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    };
    auto dot3 = [](const double* x, const double* y) {
      return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    };
    double la = norm3(ab), lb = norm3(ac), lc = norm3(bc);
    double angA = std::acos(std::clamp(dot3(ab, ac) / (la * lb), -1.0, 1.0));
    double cosB = -(ab[0] * bc[0] + ab[1] * bc[1] + ab[2] * bc[2]) / (la * lc);
    double angB = std::acos(std::clamp(cosB, -1.0, 1.0));
    double angC = kPi - angA - angB;
    verts[tri[0]].angle_sum += angA;
    verts[tri[1]].angle_sum += angB;
    verts[tri[2]].angle_sum += angC;

    double gm = tri_gm[tnum];
    double S = gm * gm + f.eps * f.eps;
    out.area += area;
    out.int_gradp1 += area * std::pow(S, 0.5 * f.p - 1.0) * gm;
    out.int_grad2 += area * gm * gm;
    // mean curvature from the lattice stencils at the three corners
    double Hv[3];
    const SurfVertex* corner[3] = {&A, &B, &C};
    for (int k = 0; k < 3; ++k) {
      double m2 = corner[k]->grad[0] * corner[k]->grad[0] +
                  corner[k]->grad[1] * corner[k]->grad[1] +
                  corner[k]->grad[2] * corner[k]->grad[2];
      double gmag = std::sqrt(m2);
      Hv[k] = gmag > 0.0 ? (corner[k]->lap - corner[k]->vnn) / gmag : 0.0;
    }
    out.int_gradH += area * gm * (Hv[0] + Hv[1] + Hv[2]) / 3.0;
    out.int_H2 += area * (Hv[0] * Hv[0] + Hv[1] * Hv[1] + Hv[2] * Hv[2]) / 3.0;
    ++out.n_triangles;
  }
  out.n_vertices = static_cast<long>(verts.size());
  out.min_grad = min_grad;
  out.closed = !touches_face;
  if (out.closed) {
    // total angle defect of a closed simplicial surface is 2 pi chi; the sum
    // is the discrete Gauss curvature integral and doubles as a watertightness
    // check, landing on 4 pi to roundoff for a genus-0 level set
    double defect = 0.0;
    for (const auto& sv : verts) defect += 2.0 * kPi - sv.angle_sum;
    out.int_K = defect;
  } else {
    out.int_K = std::numeric_limits<double>::quiet_NaN();
    out.int_gradH = std::numeric_limits<double>::quiet_NaN();
    out.int_H2 = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::string box3_field_to_json(const Box3Field& f) {
  nlohmann::json j;
  nlohmann::json m;
  switch (f.grid.metric.kind) {
    case MetricKind::euclidean:
      m["kind"] = "euclidean";
      break;
    case MetricKind::schwarzschild:
      m["kind"] = "schwarzschild";
      m["mass"] = f.grid.metric.mass;
      break;
    case MetricKind::profile:
      m["kind"] = "profile";
      m["r"] = f.grid.metric.prof_r;
      m["phi"] = f.grid.metric.prof_phi;
      m["sigma"] = f.grid.metric.sigma;
      break;
  }
  m["r_min"] = f.grid.metric.r_min;
  j["metric"] = m;
  j["grid"] = {{"mode", "box3"},
               {"n", f.grid.n},
               {"L", f.grid.L},
               {"r_min", f.grid.r_min},
               {"center", f.grid.center}};
  j["p"] = f.p;
  j["eps"] = f.eps;
  j["bc"] = {f.bc_inner, f.bc_outer};
  j["v"] = f.v;
  j["energy"] = f.energy;
  return j.dump(2);
}

Box3Field box3_field_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  const auto& m = j.at("metric");
  std::string kind = m.at("kind");
  RadialMetric g;
  if (kind == "euclidean") {
    g = make_euclidean(m.at("r_min").get<double>());
  } else if (kind == "schwarzschild") {
    g = make_schwarzschild(m.at("mass").get<double>(), m.at("r_min").get<double>());
  } else if (kind == "profile") {
    g = make_profile(m.at("r").get<std::vector<double>>(),
                     m.at("phi").get<std::vector<double>>(),
                     m.at("sigma").get<double>());
  } else {
    throw std::invalid_argument("box3_field_from_json: unknown metric kind");
  }
  const auto& gj = j.at("grid");
  Box3Field f;
  f.grid = make_box3_grid(g, gj.at("n").get<int>(), gj.at("L").get<double>(),
                          gj.at("r_min").get<double>(),
                          gj.at("center").get<std::array<double, 3>>());
  f.p = j.at("p").get<double>();
  f.eps = j.at("eps").get<double>();
  f.bc_inner = j.at("bc")[0].get<double>();
  f.bc_outer = j.at("bc")[1].get<double>();
  f.v = j.at("v").get<std::vector<double>>();
  if (static_cast<long>(f.v.size()) != f.grid.n_nodes())
    throw std::runtime_error("box3_field_from_json: value array does not match the grid");
  std::vector<double> grad;
  f.energy = box3_energy_and_gradient(f.grid, f.v, f.p, f.eps, grad);
  double stored = j.at("energy").get<double>();
  if (std::fabs(stored - f.energy) > 1e-10 * (std::fabs(stored) + 1.0))
    throw std::runtime_error(
        "box3_field_from_json: stored energy inconsistent with re-evaluation");
  return f;
}

}  // namespace pharm
