#include "monotone.hpp"

#include "num.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pharm {

namespace {
constexpr double kPi = std::numbers::pi;
}

QuantityRow quantity_row(double p, double a, double c, const LevelSurfaceData& d) {
  (void)p;
  double t = d.t;
  double X = d.int_gradH;
  double Y = d.int_grad2;
  double ca = c * a;
  QuantityRow q;
  q.t = t;
  q.s = d.s;
  q.A = 8.0 * kPi * t - std::pow(t, a + 1.0) / ca * X;
  q.B = 4.0 * kPi * t - std::pow(t, 2.0 * a + 1.0) / (ca * ca) * Y;
  q.F = 4.0 * kPi * t - std::pow(t, a + 1.0) / ca * X +
        std::pow(t, 2.0 * a + 1.0) / (ca * ca) * Y;
  q.D = 4.0 * kPi * std::pow(t, -a) + X / c -
        (1.0 + 2.0 * a) * std::pow(t, a) / (ca * ca) * Y;
  q.G = -4.0 * kPi * a * a * c * std::pow(t, -a) +
        Y / (c * std::pow(t, -a));
  q.m_H = std::sqrt(d.area / (16.0 * kPi)) *
          (1.0 - d.int_H2 / (16.0 * kPi));
  q.regular = d.regular;
  return q;
}

QuantitySeries quantity_series(const RadialPotential& pot,
                               const std::vector<double>& t_grid) {
  if (t_grid.empty())
    throw std::invalid_argument("quantity_series: empty t grid");
  QuantitySeries s;
  s.p = pot.p;
  s.a = pot.a;
  s.c = pot.c;
  s.C_p = pot.C_p;
  s.rows.reserve(t_grid.size());
  for (double t : t_grid)
    s.rows.push_back(quantity_row(pot.p, pot.a, pot.c, extract_level(pot, t)));
  return s;
}

QuantitySeries quantity_series_from_rows(double p, double a, double c, double C_p,
                                         const std::vector<LevelSurfaceData>& rows) {
  if (rows.empty())
    throw std::invalid_argument("quantity_series_from_rows: empty rows");
  QuantitySeries s;
  s.p = p;
  s.a = a;
  s.c = c;
  s.C_p = C_p;
  s.rows.reserve(rows.size());
  for (const auto& d : rows) s.rows.push_back(quantity_row(p, a, c, d));
  return s;
}

SeriesReport series_checks(const QuantitySeries& s, double tol) {
  SeriesReport rep;
  double a = s.a, c = s.c;
  const auto& rows = s.rows;

  auto relres = [](double lhs, double rhs) {
    return std::fabs(lhs - rhs) / (std::fabs(lhs) + std::fabs(rhs) + 1.0);
  };

  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& q = rows[i];
    rep.alg_F = std::max(rep.alg_F, relres(q.F, q.A - q.B));
    rep.alg_D = std::max(
        rep.alg_D,
        relres(q.D, std::pow(q.t, -a - 1.0) * ((1.0 + 2.0 * a) * q.B - a * q.A)));
    rep.alg_G = std::max(
        rep.alg_G, relres(q.G, -c * a * a * std::pow(q.t, -a - 1.0) * q.B));
    if (q.regular) ++rep.regular_rows;
  }

  // monotonicity and positivity between/at consecutive regular rows
  size_t prev = rows.size();
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].regular) continue;
    const auto& q = rows[i];
    double comb = (1.0 + 2.0 * a) * q.B - a * q.A;
    if (q.D < -tol * (std::fabs(q.D) + 1.0))
      rep.violations.push_back({i, "D >= 0", -q.D});
    if (comb < -tol * (std::fabs(comb) + 1.0))
      rep.violations.push_back({i, "(1+2a)B - aA >= 0", -comb});
    if (prev < rows.size()) {
      const auto& qp = rows[prev];
      auto slack = [&](double v) { return tol * (std::fabs(v) + 1.0); };
      if (q.D > qp.D + slack(qp.D))
        rep.violations.push_back({i, "D nonincreasing", q.D - qp.D});
      if (q.B < qp.B - slack(qp.B))
        rep.violations.push_back({i, "B nondecreasing", qp.B - q.B});
      if (q.A < qp.A - slack(qp.A))
        rep.violations.push_back({i, "A nondecreasing", qp.A - q.A});
      if (q.F < qp.F - slack(qp.F))
        rep.violations.push_back({i, "F nondecreasing", qp.F - q.F});
    }
    prev = i;
  }

  // central FD identities on interior triples of regular rows
  for (size_t i = 1; i + 1 < rows.size(); ++i) {
    if (!(rows[i - 1].regular && rows[i].regular && rows[i + 1].regular)) continue;
    double t0 = rows[i - 1].t, t1 = rows[i].t, t2 = rows[i + 1].t;
    double h0 = t1 - t0, h1 = t2 - t1;
    auto dfd = [&](double y0, double y1, double y2) {
      // nonuniform 3-point first derivative at t1
      return (y2 * h0 * h0 - y0 * h1 * h1 + y1 * (h1 * h1 - h0 * h0)) /
             (h0 * h1 * (h0 + h1));
    };
    double Dp = dfd(rows[i - 1].D, rows[i].D, rows[i + 1].D);
    double Fp = dfd(rows[i - 1].F, rows[i].F, rows[i + 1].F);
    double Gp = dfd(rows[i - 1].G, rows[i].G, rows[i + 1].G);
    double rD = std::fabs(Dp + a * std::pow(t1, -a - 1.0) * Fp);
    double rG = std::fabs(Gp - c * a * a * a * std::pow(t1, -a - 2.0) * rows[i].F);
    rep.fd_D = std::max(rep.fd_D, rD);
    rep.fd_G = std::max(rep.fd_G, rG);
  }
  return rep;
}

std::vector<std::pair<double, double>> green_quantity(
    const RadialPotential& pot, const std::vector<double>& tau_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    if (!(tau > 0.0 && tau <= 1.0 - 1e-15))
      throw std::domain_error("green_quantity: tau outside (0, boundary value)");
    double uval = 1.0 - tau;
    double t = pot.t_from_value(uval);
    LevelSurfaceData d = extract_level(pot, t);
    double G = -4.0 * kPi * pot.a * pot.a * tau + d.int_grad2 / tau;
    out.emplace_back(tau, G);
  }
  return out;
}

std::string series_to_csv(const QuantitySeries& s) {
  std::ostringstream os;
  os << "t,s,F,A,B,D,G,m_H,regular\n";
  for (const auto& q : s.rows) {
    os << fmt_g17(q.t) << ',' << fmt_g17(q.s) << ',' << fmt_g17(q.F) << ','
       << fmt_g17(q.A) << ',' << fmt_g17(q.B) << ',' << fmt_g17(q.D) << ','
       << fmt_g17(q.G) << ',' << fmt_g17(q.m_H) << ','
       << (q.regular ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace pharm
