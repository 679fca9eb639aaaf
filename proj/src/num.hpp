#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pharm {

// Adaptive Gauss-Kronrod quadrature on a finite interval. Splits the worst
// panel until the summed error estimate drops below max(abs_tol, rel_tol*|I|).
// Deterministic: the refinement order depends only on the integrand values.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-13);

// Root of a continuous function that changes sign on [lo, hi], by TOMS 748
// bracketing. rel_tol is the relative width of the final bracket.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = 1e-13);

std::vector<double> lin_grid(double lo, double hi, int n);
std::vector<double> log_grid(double lo, double hi, int n);

// Limit of y(q) as q -> 0+ fitted on the model
//   y = c0 + c1*q*log(q) + c2*q + c3*q^2
// through the last 4 samples (or the 3-term model without the q^2 column when
// only 3 samples are given). The q*log(q) column captures the leading
// correction of exponent-type quantities like a^q near q = 0, which a plain
// polynomial misses. Throws if fewer than 3 samples.
double fit_limit_qlogq(std::vector<double> q, std::vector<double> y);

// Five-point central first derivative, error O(h^4).
double deriv5(const std::function<double(double)>& f, double x, double h);

// Shortest round-trippable decimal form of a double ("%.17g").
std::string fmt_g17(double x);

}  // namespace pharm
