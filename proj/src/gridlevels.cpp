#include "gridlevels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace pharm {

namespace {

constexpr double kPi = 3.14159265358979323846;

// centered difference with one-sided second-order stencils at the ends
double d1(const std::vector<double>& a, int k, int n, int stride, double h) {
  if (k == 0)
    return (-3.0 * a[0] + 4.0 * a[stride] - a[2 * stride]) / (2.0 * h);
  if (k == n - 1)
    return (3.0 * a[k * stride] - 4.0 * a[(k - 1) * stride] +
            a[(k - 2) * stride]) / (2.0 * h);
  return (a[(k + 1) * stride] - a[(k - 1) * stride]) / (2.0 * h);
}

}  // namespace

GridDerivatives grid_derivatives(const GridField& f) {
  const AnnulusGrid& g = f.grid;
  int nx = g.n_xi, nt = g.n_theta, nn = g.n_nodes();
  GridDerivatives d;
  d.v_xi.resize(nn);
  d.v_th.resize(nn);
  d.grad.resize(nn);
  d.lap.resize(nn);
  d.vnn.resize(nn);

  for (int j = 0; j < nt; ++j) {
    std::vector<double> col(nx);
    for (int i = 0; i < nx; ++i) col[i] = f.v[g.node(i, j)];
    for (int i = 0; i < nx; ++i) d.v_xi[g.node(i, j)] = d1(col, i, nx, 1, g.dxi);
  }
  for (int i = 0; i < nx; ++i) {
    const double* row = f.v.data() + (size_t)g.node(i, 0);
    std::vector<double> tmp(row, row + nt);
    for (int j = 0; j < nt; ++j)
      d.v_th[g.node(i, j)] = d1(tmp, j, nt, 1, g.dtheta);
  }

  for (int i = 0; i < nx; ++i) {
    double pe = g.phi_eff_node[i], r = g.r_node[i];
    for (int j = 0; j < nt; ++j) {
      int n = g.node(i, j);
      double X = d.v_xi[n] / pe, Y = d.v_th[n] / r;
      d.grad[n] = std::sqrt(X * X + Y * Y);
    }
  }

  // radial part of the laplacian from the flux array W1 = r^2 v_xi / phi_eff
  std::vector<double> W1(nn);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nt; ++j) {
      int n = g.node(i, j);
      W1[n] = g.r_node[i] * g.r_node[i] * d.v_xi[n] / g.phi_eff_node[i];
    }
  for (int j = 0; j < nt; ++j) {
    std::vector<double> col(nx);
    for (int i = 0; i < nx; ++i) col[i] = W1[g.node(i, j)];
    for (int i = 0; i < nx; ++i) {
      int n = g.node(i, j);
      double r = g.r_node[i];
      d.lap[n] = d1(col, i, nx, 1, g.dxi) / (g.phi_eff_node[i] * r * r);
    }
  }
  // angular part from W2 = sin(theta) v_th; symmetric limit on the axis
  for (int i = 0; i < nx; ++i) {
    double r2 = g.r_node[i] * g.r_node[i];
    std::vector<double> W2(nt);
    for (int j = 0; j < nt; ++j)
      W2[j] = std::sin(g.theta[j]) * d.v_th[g.node(i, j)];
    for (int j = 0; j < nt; ++j) {
      int n = g.node(i, j);
      if (j == 0) {
        double vthth = 2.0 * (f.v[g.node(i, 1)] - f.v[n]) / (g.dtheta * g.dtheta);
        d.lap[n] += 2.0 * vthth / r2;
      } else if (j == nt - 1) {
        double vthth =
            2.0 * (f.v[g.node(i, nt - 2)] - f.v[n]) / (g.dtheta * g.dtheta);
        d.lap[n] += 2.0 * vthth / r2;
      } else {
        d.lap[n] += d1(W2, j, nt, 1, g.dtheta) / (r2 * std::sin(g.theta[j]));
      }
    }
  }

  // vnn = (grad v . grad |grad v|) / |grad v|
  std::vector<double> G_xi(nn), G_th(nn);
  for (int j = 0; j < nt; ++j) {
    std::vector<double> col(nx);
    for (int i = 0; i < nx; ++i) col[i] = d.grad[g.node(i, j)];
    for (int i = 0; i < nx; ++i) G_xi[g.node(i, j)] = d1(col, i, nx, 1, g.dxi);
  }
  for (int i = 0; i < nx; ++i) {
    std::vector<double> tmp(nt);
    for (int j = 0; j < nt; ++j) tmp[j] = d.grad[g.node(i, j)];
    for (int j = 0; j < nt; ++j)
      G_th[g.node(i, j)] = d1(tmp, j, nt, 1, g.dtheta);
  }
  for (int i = 0; i < nx; ++i) {
    double pe = g.phi_eff_node[i], r = g.r_node[i];
    for (int j = 0; j < nt; ++j) {
      int n = g.node(i, j);
      if (d.grad[n] == 0.0) {
        d.vnn[n] = 0.0;
      } else {
        d.vnn[n] = (d.v_xi[n] * G_xi[n] / (pe * pe) +
                    d.v_th[n] * G_th[n] / (r * r)) / d.grad[n];
      }
    }
  }
  return d;
}

namespace {

// Edge identifiers: 2*(i*n_theta+j) for the edge (i,j)-(i+1,j) along xi,
// 2*(i*n_theta+j)+1 for (i,j)-(i,j+1) along theta.
struct Crossing {
  double xi, theta, lambda;
  int n0, n1;  // endpoint node ids for field interpolation
};

struct Walker {
  std::map<long, std::array<long, 2>> nbr;  // edge -> neighbor edges
  std::map<long, int> degree;
  void link(long e1, long e2) {
    auto add = [&](long a, long b) {
      auto& slots = nbr[a];
      int& d = degree[a];
      if (d < 2) slots[d] = b;
      ++d;
    };
    add(e1, e2);
    add(e2, e1);
  }
};

}  // namespace

LevelSurfaceData extract_level_value(const GridField& f,
                                     const GridDerivatives& d, double value) {
  const AnnulusGrid& g = f.grid;
  double lo = std::min(f.bc_inner, f.bc_outer);
  double hi = std::max(f.bc_inner, f.bc_outer);
  if (!(value > lo && value < hi))
    throw std::invalid_argument(
        "extract_level: value lies outside the open boundary-data range");

  int nx = g.n_xi, nt = g.n_theta;
  auto above = [&](int n) { return f.v[n] >= value; };
  auto edge_id = [&](int i, int j, bool along_xi) {
    return 2L * (long)(i * nt + j) + (along_xi ? 0 : 1);
  };
  std::map<long, Crossing> crossings;
  auto cross_on = [&](int n0, int n1, double xi0, double th0, double xi1,
                      double th1) {
    double lam = (value - f.v[n0]) / (f.v[n1] - f.v[n0]);
    return Crossing{xi0 + lam * (xi1 - xi0), th0 + lam * (th1 - th0), lam, n0, n1};
  };

  Walker walk;
  long nsegs = 0;
  for (int i = 0; i + 1 < nx; ++i)
    for (int j = 0; j + 1 < nt; ++j) {
      int n00 = g.node(i, j), n10 = g.node(i + 1, j);
      int n01 = g.node(i, j + 1), n11 = g.node(i + 1, j + 1);
      bool a00 = above(n00), a10 = above(n10), a01 = above(n01), a11 = above(n11);
      // edges in the order bottom, right, top, left
      long ids[4];
      bool crossed[4];
      ids[0] = edge_id(i, j, true);
      crossed[0] = a00 != a10;
      ids[1] = edge_id(i + 1, j, false);
      crossed[1] = a10 != a11;
      ids[2] = edge_id(i, j + 1, true);
      crossed[2] = a01 != a11;
      ids[3] = edge_id(i, j, false);
      crossed[3] = a00 != a01;
      int nc = crossed[0] + crossed[1] + crossed[2] + crossed[3];
      if (nc == 0) continue;
      if (crossed[0] && !crossings.count(ids[0]))
        crossings[ids[0]] = cross_on(n00, n10, g.xi[i], g.theta[j], g.xi[i + 1], g.theta[j]);
      if (crossed[1] && !crossings.count(ids[1]))
        crossings[ids[1]] = cross_on(n10, n11, g.xi[i + 1], g.theta[j], g.xi[i + 1], g.theta[j + 1]);
      if (crossed[2] && !crossings.count(ids[2]))
        crossings[ids[2]] = cross_on(n01, n11, g.xi[i], g.theta[j + 1], g.xi[i + 1], g.theta[j + 1]);
      if (crossed[3] && !crossings.count(ids[3]))
        crossings[ids[3]] = cross_on(n00, n01, g.xi[i], g.theta[j], g.xi[i], g.theta[j + 1]);
      if (nc == 2) {
        int first = -1;
        for (int e = 0; e < 4; ++e)
          if (crossed[e]) {
            if (first < 0) first = e;
            else walk.link(ids[first], ids[e]);
          }
        ++nsegs;
      } else {
        // saddle cell: the center average decides which corners the two
        // segments hug
        double center = 0.25 * (f.v[n00] + f.v[n10] + f.v[n01] + f.v[n11]);
        if ((center >= value) == a00) {
          walk.link(ids[0], ids[1]);  // segments around n10 and n01
          walk.link(ids[2], ids[3]);
        } else {
          walk.link(ids[0], ids[3]);  // segments around n00 and n11
          walk.link(ids[1], ids[2]);
        }
        nsegs += 2;
      }
    }

  if (nsegs == 0)
    throw std::runtime_error("extract_level: no contour at this value");

  // endpoints are the degree-1 edges; a clean meridian has exactly two,
  // one on each axis row
  std::vector<long> ends;
  for (auto& kv : walk.degree)
    if (kv.second == 1) ends.push_back(kv.first);
  if (ends.size() != 2)
    throw std::runtime_error(
        "extract_level: degenerate contour (" + std::to_string(ends.size()) +
        " endpoints)");
  auto theta_of = [&](long e) { return crossings.at(e).theta; };
  long start = theta_of(ends[0]) <= theta_of(ends[1]) ? ends[0] : ends[1];

  std::vector<long> chain;
  chain.push_back(start);
  long prev = -1, cur = start;
  while (true) {
    auto& nb = walk.nbr.at(cur);
    int deg = walk.degree.at(cur);
    long next = -1;
    for (int k = 0; k < std::min(deg, 2); ++k)
      if (nb[k] != prev) next = nb[k];
    if (next < 0) break;
    chain.push_back(next);
    prev = cur;
    cur = next;
    if ((long)chain.size() > 2 * nsegs + 2) break;  // safety against cycles
  }
  long walked = (long)chain.size() - 1;
  if (walked < nsegs && (nsegs - walked) > std::max(1L, nsegs / 50))
    throw std::runtime_error(
        "extract_level: contour disconnected (" + std::to_string(nsegs - walked) +
        " of " + std::to_string(nsegs) + " segments off the meridian)");

  // vertex data: exact geometry, field arrays interpolated along the edge
  size_t N = chain.size();
  std::vector<double> R(N), S_len(N > 1 ? N - 1 : 0);
  std::vector<double> G(N), lap(N), vnn(N);
  std::vector<double> xi_v(N), th_v(N);
  for (size_t k = 0; k < N; ++k) {
    const Crossing& c = crossings.at(chain[k]);
    xi_v[k] = c.xi;
    th_v[k] = c.theta;
    double r = g.r_of_xi(c.xi);
    R[k] = r * std::sin(c.theta);
    auto lerp = [&](const std::vector<double>& arr) {
      return arr[c.n0] + c.lambda * (arr[c.n1] - arr[c.n0]);
    };
    G[k] = lerp(d.grad);
    lap[k] = lerp(d.lap);
    vnn[k] = lerp(d.vnn);
  }
  for (size_t k = 0; k + 1 < N; ++k) {
    double xm = 0.5 * (xi_v[k] + xi_v[k + 1]);
    double dxi = xi_v[k + 1] - xi_v[k];
    double dth = th_v[k + 1] - th_v[k];
    double pe = g.phi_eff_of_xi(xm);
    double rm = g.r_of_xi(xm);
    S_len[k] = std::sqrt(pe * pe * dxi * dxi + rm * rm * dth * dth);
  }

  LevelSurfaceData row;
  row.t = std::numeric_limits<double>::quiet_NaN();
  row.s = value;
  row.min_grad = std::numeric_limits<double>::infinity();
  double e2 = f.eps * f.eps;
  std::vector<double> gs;
  gs.reserve(N);
  for (size_t k = 0; k < N; ++k) {
    double h_prev = k > 0 ? S_len[k - 1] : 0.0;
    double h_next = k + 1 < N ? S_len[k] : 0.0;
    double w = 2.0 * kPi * R[k] * 0.5 * (h_prev + h_next);
    row.area += w;
    row.int_grad2 += w * G[k] * G[k];
    double gradH = lap[k] - vnn[k];  // |grad v| H
    row.int_gradH += w * gradH;
    if (G[k] > 0.0) row.int_H2 += w * (gradH / G[k]) * (gradH / G[k]);
    row.int_gradp1 +=
        w * std::pow(G[k] * G[k] + e2, 0.5 * f.p - 1.0) * G[k];
    row.min_grad = std::min(row.min_grad, G[k]);
    gs.push_back(G[k]);
    if (k > 0 && k + 1 < N) {
      // -R''/R revolved: the vertex-centered weights make the sum telescope
      // to the axis slopes, the discrete Gauss-Bonnet total
      row.int_K += -2.0 * kPi * ((R[k + 1] - R[k]) / S_len[k] -
                                 (R[k] - R[k - 1]) / S_len[k - 1]);
    }
  }
  std::nth_element(gs.begin(), gs.begin() + gs.size() / 2, gs.end());
  double median = gs[gs.size() / 2];
  row.regular = row.min_grad > 1e-6 * median;
  return row;
}

LevelSurfaceData extract_level(const GridField& f, const GridDerivatives& d,
                               double t, double a, double c) {
  if (!(t > 0.0)) throw std::invalid_argument("extract_level: t must be positive");
  LevelSurfaceData row = extract_level_value(f, d, 1.0 - c * std::pow(t, -a));
  row.t = t;
  return row;
}

}  // namespace pharm
