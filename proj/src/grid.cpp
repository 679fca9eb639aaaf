#include "grid.hpp"

#include "num.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pharm {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Gauss-Legendre points on [0,1]
constexpr double kGaussLo = 0.5 - 0.28867513459481288225;  // 1/(2 sqrt 3)
constexpr double kGaussHi = 0.5 + 0.28867513459481288225;

}  // namespace

double AnnulusGrid::r_of_xi(double x) const {
  if (map == GridMap::horizon_power) {
    double span = r_out - metric.r_min;
    return metric.r_min + span * x * x;
  }
  return metric.r_min * std::exp(x * std::log(r_out / metric.r_min));
}

double AnnulusGrid::phi_eff_of_xi(double x) const {
  if (map == GridMap::horizon_power) {
    // Only used for the horizon metric, where phi = sqrt(r / (r - 2m))
    // and r - 2m = span * x^2 exactly, so the product 2 span x phi(r)
    // collapses to 2 sqrt(span * r) with no cancellation, including x = 0.
    double span = r_out - metric.r_min;
    return 2.0 * std::sqrt(span * r_of_xi(x));
  }
  double r = r_of_xi(x);
  return metric.phi(r) * r * std::log(r_out / metric.r_min);
}

AnnulusGrid make_annulus_grid(const RadialMetric& g, int n_xi, int n_theta,
                              double r_out) {
  if (n_xi < 4 || n_theta < 4) throw std::invalid_argument("grid: need at least 4 nodes per axis");
  if (!(r_out > g.r_min)) throw std::invalid_argument("grid: r_out must exceed r_min");
  AnnulusGrid grid;
  grid.metric = g;
  grid.n_xi = n_xi;
  grid.n_theta = n_theta;
  grid.r_out = r_out;
  grid.map = g.singular_at_rmin() ? GridMap::horizon_power : GridMap::log_radius;
  grid.dxi = 1.0 / (n_xi - 1);
  grid.dtheta = kPi / (n_theta - 1);

  grid.xi.resize(n_xi);
  grid.r_node.resize(n_xi);
  grid.phi_eff_node.resize(n_xi);
  for (int i = 0; i < n_xi; ++i) {
    grid.xi[i] = i * grid.dxi;
    grid.r_node[i] = grid.r_of_xi(grid.xi[i]);
    grid.phi_eff_node[i] = grid.phi_eff_of_xi(grid.xi[i]);
  }
  grid.theta.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) grid.theta[j] = j * grid.dtheta;

  grid.xi_g.resize(2 * (n_xi - 1));
  grid.r_g.resize(2 * (n_xi - 1));
  grid.phi_eff_g.resize(2 * (n_xi - 1));
  for (int i = 0; i + 1 < n_xi; ++i) {
    for (int a = 0; a < 2; ++a) {
      double x = grid.xi[i] + (a == 0 ? kGaussLo : kGaussHi) * grid.dxi;
      grid.xi_g[2 * i + a] = x;
      grid.r_g[2 * i + a] = grid.r_of_xi(x);
      grid.phi_eff_g[2 * i + a] = grid.phi_eff_of_xi(x);
    }
  }
  grid.theta_g.resize(2 * (n_theta - 1));
  grid.sin_g.resize(2 * (n_theta - 1));
  for (int j = 0; j + 1 < n_theta; ++j) {
    for (int b = 0; b < 2; ++b) {
      double t = grid.theta[j] + (b == 0 ? kGaussLo : kGaussHi) * grid.dtheta;
      grid.theta_g[2 * j + b] = t;
      grid.sin_g[2 * j + b] = std::sin(t);
    }
  }
  return grid;
}

namespace {

void check_energy_args(const AnnulusGrid& grid, const std::vector<double>& values,
                       double p, double eps) {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("energy: p must lie in (1, 2]");
  if (!(eps >= 0.0)) throw std::invalid_argument("energy: eps must be nonnegative");
  if (eps == 0.0 && p != 2.0)
    throw std::invalid_argument("energy: eps = 0 is only admissible for p = 2");
  if ((int)values.size() != grid.n_nodes())
    throw std::invalid_argument("energy: value array does not match the grid");
}

// Energy and gradient contribution of one cell. Bilinear shape functions;
// the gradient is evaluated at the four 2x2 Gauss points of the cell.
// (A single midpoint evaluation would leave the alternating-sign node
// pattern with zero discrete gradient, a spurious null direction that
// makes the Newton system singular; the 2x2 rule removes it and keeps
// the quadrature exact for the bilinear stiffness.)
double cell_energy_grad(const AnnulusGrid& grid, const double* v, double p,
                        double eps, int i, int j, double g4[4]) {
  int n00 = grid.node(i, j), n10 = grid.node(i + 1, j);
  int n01 = grid.node(i, j + 1), n11 = grid.node(i + 1, j + 1);
  double v00 = v[n00], v10 = v[n10], v01 = v[n01], v11 = v[n11];
  double e2 = eps * eps;
  double base_w = 2.0 * kPi * grid.dxi * grid.dtheta * 0.25;
  double E = 0.0;
  g4[0] = g4[1] = g4[2] = g4[3] = 0.0;
  for (int a = 0; a < 2; ++a) {
    double s = (a == 0 ? kGaussLo : kGaussHi);
    double pe = grid.phi_eff_g[2 * i + a];
    double rg = grid.r_g[2 * i + a];
    double wr = base_w * pe * rg * rg;
    for (int b = 0; b < 2; ++b) {
      double t = (b == 0 ? kGaussLo : kGaussHi);
      double w = wr * grid.sin_g[2 * j + b];
      double vxi = ((v10 - v00) * (1.0 - t) + (v11 - v01) * t) / grid.dxi;
      double vth = ((v01 - v00) * (1.0 - s) + (v11 - v10) * s) / grid.dtheta;
      double X = vxi / pe;
      double Y = vth / rg;
      double S = X * X + Y * Y + e2;
      double Sp = std::pow(S, 0.5 * p - 1.0);  // S^{p/2 - 1}
      E += (w / p) * Sp * S;
      // dX/dv_k and dY/dv_k for k in {00, 10, 01, 11}
      double dX[4] = {-(1.0 - t), (1.0 - t), -t, t};
      double dY[4] = {-(1.0 - s), -s, (1.0 - s), s};
      double cx = w * Sp * X / (grid.dxi * pe);
      double cy = w * Sp * Y / (grid.dtheta * rg);
      for (int k = 0; k < 4; ++k) g4[k] += cx * dX[k] + cy * dY[k];
    }
  }
  return E;
}

void scatter_cell(const AnnulusGrid& grid, int i, int j, const double g4[4],
                  std::vector<double>& grad) {
  grad[grid.node(i, j)] += g4[0];
  grad[grid.node(i + 1, j)] += g4[1];
  grad[grid.node(i, j + 1)] += g4[2];
  grad[grid.node(i + 1, j + 1)] += g4[3];
}

void zero_boundary(const AnnulusGrid& grid, std::vector<double>& grad) {
  for (int j = 0; j < grid.n_theta; ++j) {
    grad[grid.node(0, j)] = 0.0;
    grad[grid.node(grid.n_xi - 1, j)] = 0.0;
  }
}

}  // namespace

double energy_and_gradient_serial(const AnnulusGrid& grid,
                                  const std::vector<double>& values, double p,
                                  double eps, std::vector<double>& grad) {
  check_energy_args(grid, values, p, eps);
  grad.assign(grid.n_nodes(), 0.0);
  double E = 0.0;
  double g4[4];
  for (int i = 0; i + 1 < grid.n_xi; ++i)
    for (int j = 0; j + 1 < grid.n_theta; ++j) {
      E += cell_energy_grad(grid, values.data(), p, eps, i, j, g4);
      scatter_cell(grid, i, j, g4, grad);
    }
  zero_boundary(grid, grad);
  return E;
}

double energy_and_gradient(const AnnulusGrid& grid,
                           const std::vector<double>& values, double p,
                           double eps, std::vector<double>& grad) {
  check_energy_args(grid, values, p, eps);
  int ncx = grid.n_xi - 1, nct = grid.n_theta - 1;
  int ncells = ncx * nct;
  // Pass 1: per-cell contributions in parallel, stored per cell.
  std::vector<double> cell_E(ncells);
  std::vector<double> cell_g(4 * (size_t)ncells);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int c = 0; c < ncells; ++c) {
    int i = c / nct, j = c % nct;
    cell_E[c] = cell_energy_grad(grid, values.data(), p, eps, i, j,
                                 &cell_g[4 * (size_t)c]);
  }
  // Pass 2: serial reduction in the same cell order as the serial kernel,
  // so the result is byte-identical at any thread count.
  grad.assign(grid.n_nodes(), 0.0);
  double E = 0.0;
  for (int c = 0; c < ncells; ++c) {
    int i = c / nct, j = c % nct;
    E += cell_E[c];
    scatter_cell(grid, i, j, &cell_g[4 * (size_t)c], grad);
  }
  zero_boundary(grid, grad);
  return E;
}

namespace {

// Newton system over interior nodes (both poles included; the xi rims
// carry the Dirichlet data). Returns the Hessian restricted to the
// interior block.
void assemble_hessian(const AnnulusGrid& grid, const std::vector<double>& v,
                      double p, double eps, const std::vector<int>& dof,
                      Eigen::SparseMatrix<double>& H) {
  double e2 = eps * eps;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve((size_t)grid.n_cells() * 16);
  for (int i = 0; i + 1 < grid.n_xi; ++i)
    for (int j = 0; j + 1 < grid.n_theta; ++j) {
      int nd[4] = {grid.node(i, j), grid.node(i + 1, j), grid.node(i, j + 1),
                   grid.node(i + 1, j + 1)};
      double vv[4] = {v[nd[0]], v[nd[1]], v[nd[2]], v[nd[3]]};
      double base_w = 2.0 * kPi * grid.dxi * grid.dtheta * 0.25;
      double Hc[4][4] = {};
      for (int a = 0; a < 2; ++a) {
        double s = (a == 0 ? kGaussLo : kGaussHi);
        double pe = grid.phi_eff_g[2 * i + a];
        double rg = grid.r_g[2 * i + a];
        double wr = base_w * pe * rg * rg;
        for (int b = 0; b < 2; ++b) {
          double t = (b == 0 ? kGaussLo : kGaussHi);
          double w = wr * grid.sin_g[2 * j + b];
          double vxi = ((vv[1] - vv[0]) * (1.0 - t) + (vv[3] - vv[2]) * t) / grid.dxi;
          double vth = ((vv[2] - vv[0]) * (1.0 - s) + (vv[3] - vv[1]) * s) / grid.dtheta;
          double X = vxi / pe;
          double Y = vth / rg;
          double S = X * X + Y * Y + e2;
          // at p = 2 the curvature term vanishes identically; skip its power,
          // which would produce inf * 0 on cells with exactly constant values
          double Sm2 = (p == 2.0) ? 0.0 : std::pow(S, 0.5 * p - 2.0);
          double Sp1 = (p == 2.0) ? 1.0 : Sm2 * S;  // S^{p/2 - 1}
          double dX[4] = {-(1.0 - t), (1.0 - t), -t, t};
          double dY[4] = {-(1.0 - s), -s, (1.0 - s), s};
          double zk[4];
          for (int k = 0; k < 4; ++k)
            zk[k] = X * dX[k] / (grid.dxi * pe) + Y * dY[k] / (grid.dtheta * rg);
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) {
              double dd = dX[k] * dX[l] / (grid.dxi * grid.dxi * pe * pe) +
                          dY[k] * dY[l] / (grid.dtheta * grid.dtheta * rg * rg);
              Hc[k][l] += w * (Sm2 * (p - 2.0) * zk[k] * zk[l] + Sp1 * dd);
            }
        }
      }
      for (int k = 0; k < 4; ++k) {
        if (dof[nd[k]] < 0) continue;
        for (int l = 0; l < 4; ++l) {
          if (dof[nd[l]] < 0) continue;
          trips.emplace_back(dof[nd[k]], dof[nd[l]], Hc[k][l]);
        }
      }
    }
  H.setFromTriplets(trips.begin(), trips.end());
}

// One Newton stage at fixed eps. Returns false if the gradient tolerance
// was not reached within opts.max_newton iterations.
bool newton_stage(const AnnulusGrid& grid, std::vector<double>& v, double p,
                  double eps, double tol, const SolveOptions& opts,
                  int& iters_used, double& grad_norm, double& energy) {
  std::vector<int> dof(grid.n_nodes(), -1);
  int ndof = 0;
  for (int i = 1; i + 1 < grid.n_xi; ++i)
    for (int j = 0; j < grid.n_theta; ++j) dof[grid.node(i, j)] = ndof++;

  std::vector<double> grad;
  energy = energy_and_gradient(grid, v, p, eps, grad);
  for (int it = 0; it < opts.max_newton; ++it) {
    grad_norm = 0.0;
    for (int n = 0; n < grid.n_nodes(); ++n)
      grad_norm = std::max(grad_norm, std::abs(grad[n]));
    if (grad_norm <= tol) return true;

    Eigen::SparseMatrix<double> H(ndof, ndof);
    assemble_hessian(grid, v, p, eps, dof, H);
    Eigen::VectorXd rhs(ndof);
    for (int n = 0; n < grid.n_nodes(); ++n)
      if (dof[n] >= 0) rhs[dof[n]] = -grad[n];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    Eigen::VectorXd d;
    double slope;
    if (ldlt.info() == Eigen::Success) {
      d = ldlt.solve(rhs);
      slope = -d.dot(rhs);  // grad . d
    } else {
      slope = 1.0;
    }
    if (!(slope < 0.0)) {
      // fall back to steepest descent if the factorization failed or the
      // direction lost descent to roundoff
      d = rhs;
      slope = -rhs.squaredNorm();
    }

    double step = 1.0;
    std::vector<double> vtrial(v);
    std::vector<double> gtrial;
    double Etrial = 0.0;
    bool accepted = false;
    for (int back = 0; back < 30; ++back) {
      for (int n = 0; n < grid.n_nodes(); ++n)
        if (dof[n] >= 0) vtrial[n] = v[n] + step * d[dof[n]];
      Etrial = energy_and_gradient(grid, vtrial, p, eps, gtrial);
      // the 1e-14 |E| term keeps backtracking from stalling on roundoff
      // when the predicted decrease sits below the energy's own noise floor
      if (Etrial <= energy + 1e-4 * step * slope + 1e-14 * (std::fabs(energy) + 1.0)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return false;
    v.swap(vtrial);
    grad.swap(gtrial);
    energy = Etrial;
    ++iters_used;
  }
  grad_norm = 0.0;
  for (int n = 0; n < grid.n_nodes(); ++n)
    grad_norm = std::max(grad_norm, std::abs(grad[n]));
  return grad_norm <= tol;
}

}  // namespace

GridField solve_regularized(const AnnulusGrid& grid, double p, double eps,
                            double bc_inner, double bc_outer,
                            const SolveOptions& opts) {
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("solve: p must lie in (1, 2]");
  if (!(eps >= 0.0)) throw std::invalid_argument("solve: eps must be nonnegative");
  if (eps == 0.0 && p != 2.0)
    throw std::invalid_argument("solve: eps = 0 is only admissible for p = 2");

  GridField f;
  f.grid = grid;
  f.p = p;
  f.eps = eps;
  f.bc_inner = bc_inner;
  f.bc_outer = bc_outer;
  f.v.assign(grid.n_nodes(), 0.0);

  double spread = std::abs(bc_outer - bc_inner);
  if (spread == 0.0) {
    // the constant field is the exact minimizer
    std::fill(f.v.begin(), f.v.end(), bc_inner);
    std::vector<double> grad;
    f.energy = energy_and_gradient(grid, f.v, p, eps, grad);
    return f;
  }

  // initial guess linear in xi, boundary data exact
  for (int i = 0; i < grid.n_xi; ++i)
    for (int j = 0; j < grid.n_theta; ++j)
      f.v[grid.node(i, j)] = bc_inner + (bc_outer - bc_inner) * grid.xi[i];

  // eps continuation: geometric ladder down to the requested value,
  // warm-starting each stage. The p = 2 energy is quadratic for any eps,
  // so it solves in one stage.
  std::vector<double> stages;
  if (p == 2.0 || eps >= opts.eps_start) {
    stages.push_back(eps);
  } else {
    double e = opts.eps_start;
    stages.push_back(e);
    while (stages.back() > eps) stages.push_back(std::max(eps, stages.back() * 0.5));
  }

  double tol = opts.grad_tol_factor * spread;
  for (double e : stages) {
    double gn = 0.0, en = 0.0;
    bool ok = newton_stage(grid, f.v, p, e, tol, opts, f.newton_iters, gn, en);
    f.final_grad_norm = gn;
    f.energy = en;
    if (!ok)
      throw std::runtime_error("solve: Newton stalled at eps = " + fmt_g17(e) +
                               " with gradient norm " + fmt_g17(gn) +
                               " (tolerance " + fmt_g17(tol) + ")");
  }
  return f;
}

namespace {

// flux integrand at one theta node of the coordinate sphere xi = xi_i
double flux_integrand(const GridField& f, int i, int j, double vxi) {
  const AnnulusGrid& g = f.grid;
  double vth;
  if (j == 0 || j == g.n_theta - 1) {
    vth = 0.0;  // axis: tangential derivative vanishes by symmetry
  } else {
    vth = (f.v[g.node(i, j + 1)] - f.v[g.node(i, j - 1)]) / (2.0 * g.dtheta);
  }
  double X = vxi / g.phi_eff_node[i];
  double Y = vth / g.r_node[i];
  double m2 = X * X + Y * Y;
  if (m2 == 0.0) return 0.0;
  double S = m2 + f.eps * f.eps;
  return std::pow(S, 0.5 * f.p - 1.0) * std::sqrt(m2);
}

}  // namespace

double coordinate_flux(const GridField& f, int i) {
  const AnnulusGrid& g = f.grid;
  if (i < 0 || i >= g.n_xi) throw std::invalid_argument("flux: index out of range");
  double total = 0.0;
  for (int j = 0; j < g.n_theta; ++j) {
    double vxi;
    if (i == 0) {
      vxi = (-3.0 * f.v[g.node(0, j)] + 4.0 * f.v[g.node(1, j)] -
             f.v[g.node(2, j)]) / (2.0 * g.dxi);
    } else if (i == g.n_xi - 1) {
      vxi = (3.0 * f.v[g.node(i, j)] - 4.0 * f.v[g.node(i - 1, j)] +
             f.v[g.node(i - 2, j)]) / (2.0 * g.dxi);
    } else {
      vxi = (f.v[g.node(i + 1, j)] - f.v[g.node(i - 1, j)]) / (2.0 * g.dxi);
    }
    double q = flux_integrand(f, i, j, vxi);
    double wj = (j == 0 || j == g.n_theta - 1) ? 0.5 : 1.0;
    double sinth = std::sin(g.theta[j]);
    total += q * 2.0 * kPi * g.r_node[i] * g.r_node[i] * sinth * wj * g.dtheta;
  }
  return total;
}

double regularized_capacity(const GridField& f) { return coordinate_flux(f, 0); }

std::string field_to_json(const GridField& f) {
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
  j["grid"] = {{"n_xi", f.grid.n_xi},
               {"n_theta", f.grid.n_theta},
               {"r_out", f.grid.r_out}};
  j["p"] = f.p;
  j["eps"] = f.eps;
  j["bc"] = {f.bc_inner, f.bc_outer};
  j["v"] = f.v;
  j["energy"] = f.energy;
  return j.dump(2);
}

GridField field_from_json(const std::string& text) {
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
    throw std::invalid_argument("field_from_json: unknown metric kind");
  }
  GridField f;
  f.grid = make_annulus_grid(g, j.at("grid").at("n_xi").get<int>(),
                             j.at("grid").at("n_theta").get<int>(),
                             j.at("grid").at("r_out").get<double>());
  f.p = j.at("p").get<double>();
  f.eps = j.at("eps").get<double>();
  f.bc_inner = j.at("bc")[0].get<double>();
  f.bc_outer = j.at("bc")[1].get<double>();
  f.v = j.at("v").get<std::vector<double>>();
  if ((int)f.v.size() != f.grid.n_nodes())
    throw std::runtime_error("field_from_json: value array does not match the grid");
  std::vector<double> grad;
  f.energy = energy_and_gradient(f.grid, f.v, f.p, f.eps, grad);
  double stored = j.at("energy").get<double>();
  if (std::fabs(stored - f.energy) > 1e-10 * (std::fabs(stored) + 1.0))
    throw std::runtime_error("field_from_json: stored energy inconsistent with re-evaluation");
  return f;
}

}  // namespace pharm
