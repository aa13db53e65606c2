#pragma once

namespace hduva {

double digamma(double x);
double trigamma(double x);

// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).
double gamma_p(double a, double x);
// dP/da by central differences; accurate to ~1e-9 absolute.
double gamma_p_da(double a, double x);
// log pdf of Gamma(shape=a, rate=1) at x.
double gamma_logpdf(double a, double x);
// Quantile-matching inverse: solves P(a2, y) = P(a1, x) for y.
// Used by tests to build common-random-number finite differences.
double gamma_quantile_remap(double a1, double x, double a2);

}  // namespace hduva
