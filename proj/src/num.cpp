#include "num.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <queue>
#include <stdexcept>

namespace pharm {

namespace {

struct Panel {
  double err, a, b, val;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel eval_panel(const std::function<double(double)>& f, double a, double b) {
  double err = 0.0;
  // max_depth 0: a single 15-point Kronrod application with embedded error.
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 0, 0.0, &err);
  return {err, a, b, v};
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol) {
  if (!(b > a)) {
    if (a == b) return 0.0;
    throw std::invalid_argument("integrate: requires a < b");
  }
  std::priority_queue<Panel> q;
  q.push(eval_panel(f, a, b));
  double total_val = q.top().val, total_err = q.top().err;
  const int max_panels = 4000;
  int n = 1;
  while (total_err > std::max(abs_tol, rel_tol * std::fabs(total_val)) &&
         n < max_panels) {
    Panel w = q.top();
    q.pop();
    double mid = 0.5 * (w.a + w.b);
    Panel l = eval_panel(f, w.a, mid);
    Panel r = eval_panel(f, mid, w.b);
    total_val += l.val + r.val - w.val;
    total_err += l.err + r.err - w.err;
    q.push(l);
    q.push(r);
    ++n;
  }
  if (!std::isfinite(total_val))
    throw std::runtime_error("integrate: non-finite result");
  return total_val;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol) {
  auto tol = [rel_tol](double l, double h) {
    return std::fabs(h - l) <= rel_tol * (std::fabs(l) + std::fabs(h)) * 0.5 + 1e-300;
  };
  std::uintmax_t iters = 200;
  auto pr = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
  return 0.5 * (pr.first + pr.second);
}

std::vector<double> lin_grid(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("lin_grid: need n >= 2");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return g;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("log_grid: need 0 < lo < hi");
  if (n < 2) throw std::invalid_argument("log_grid: need n >= 2");
  std::vector<double> g(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g[i] = std::exp(llo + (lhi - llo) * double(i) / double(n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double fit_limit_qlogq(std::vector<double> q, std::vector<double> y) {
  if (q.size() != y.size() || q.size() < 3)
    throw std::invalid_argument("fit_limit_qlogq: need >= 3 matched samples");
  // use the smallest-q tail of the sequence: up to 4 entries
  size_t m = std::min<size_t>(4, q.size());
  size_t off = q.size() - m;
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (size_t i = 0; i < m; ++i) {
    double qi = q[off + i];
    if (!(qi > 0.0)) throw std::invalid_argument("fit_limit_qlogq: q must be > 0");
    A(i, 0) = 1.0;
    A(i, 1) = qi * std::log(qi);
    A(i, 2) = qi;
    if (m == 4) A(i, 3) = qi * qi;
    b(i) = y[off + i];
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  return c(0);
}

double deriv5(const std::function<double(double)>& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

}  // namespace pharm
