#pragma once

#include "levelsurf.hpp"

#include <string>
#include <vector>

namespace pharm {

// The five level-set quantities evaluated at parameter t, plus the Hawking
// mass of the level surface. With X = \int |grad u| H and Y = \int |grad u|^2
// over Sigma(t):
//   F = 4 pi t - (ca)^{-1} t^{a+1} X + (ca)^{-2} t^{2a+1} Y
//   A = 8 pi t - (ca)^{-1} t^{a+1} X
//   B = 4 pi t - (ca)^{-2} t^{2a+1} Y
//   D = 4 pi t^{-a} + c^{-1} X - (ca)^{-2} (1+2a) t^{a} Y
//   G = -4 pi a^2 c t^{-a} + (c t^{-a})^{-1} Y
//   m_H = sqrt(area/16pi) (1 - (1/16pi) \int H^2)
struct QuantityRow {
  double t, s, F, A, B, D, G, m_H;
  bool regular;
};

struct QuantitySeries {
  double p, a, c, C_p;
  std::vector<QuantityRow> rows;
};

QuantityRow quantity_row(double p, double a, double c, const LevelSurfaceData& d);

QuantitySeries quantity_series(const RadialPotential& pot,
                               const std::vector<double>& t_grid);

// Grid-sourced series: per-level integrals supplied by the caller.
QuantitySeries quantity_series_from_rows(double p, double a, double c, double C_p,
                                         const std::vector<LevelSurfaceData>& rows);

struct SeriesViolation {
  size_t row;          // index of the later row of the offending pair
  std::string what;    // which check failed
  double amount;       // size of the violation
};

// Checks on a computed series:
//  - exact algebra, machine precision: F = A - B, D = t^{-a-1}[(1+2a)B - aA],
//    G = -c a^2 t^{-a-1} B  (max relative residuals reported)
//  - monotonicity between consecutive regular rows: D nonincreasing, A, B, F
//    nondecreasing, with violations counted beyond tol*(|value|+1)
//  - positivity: D >= 0 and (1+2a)B - aA >= 0
//  - derivative identities by nonuniform central differences on the t grid:
//    D' = -a t^{-a-1} F'  and  G' = c a^3 t^{-a-2} F, residuals O(h^2)
struct SeriesReport {
  double alg_F = 0.0, alg_D = 0.0, alg_G = 0.0;   // max relative residuals
  double fd_D = 0.0, fd_G = 0.0;                  // max FD identity residuals
  std::vector<SeriesViolation> violations;
  size_t regular_rows = 0;
};

SeriesReport series_checks(const QuantitySeries& s, double tol = 1e-7);

// G(tau) = -4 pi a^2 tau + tau^{-1} \int_{{1-u = tau}} |grad u|^2 on the tau
// grid, reading the potential as u = 1 - G with the Green normalization
// (tau is the Green value, i.e. tau = c t^{-a} = 1 - u on the level).
std::vector<std::pair<double, double>> green_quantity(
    const RadialPotential& pot, const std::vector<double>& tau_grid);

std::string series_to_csv(const QuantitySeries& s);

}  // namespace pharm
