#include "hduva/core/special.hpp"

#include <cmath>
#include <limits>

#include "hduva/core/errors.hpp"

namespace hduva {
namespace {

// Series expansion of P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) = 1 - P(a, x), valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw argument_error("digamma: nonpositive argument");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw argument_error("trigamma: nonpositive argument");
  double result = 0.0;
  while (x < 10.0) {
    result += 1.0 / (x * x);
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += inv * (1.0 + 0.5 * inv +
                   inv2 * (1.0 / 6.0 -
                           inv2 * (1.0 / 30.0 -
                                   inv2 * (1.0 / 42.0 - inv2 / 30.0))));
  return result;
}

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw argument_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_p_da(double a, double x) {
  const double h = 1e-5 * (a > 1.0 ? a : 1.0);
  const double lo = a - h > 1e-12 ? a - h : 1e-12;
  return (gamma_p(a + h, x) - gamma_p(lo, x)) / (a + h - lo);
}

double gamma_logpdf(double a, double x) {
  return (a - 1.0) * std::log(x) - x - std::lgamma(a);
}

double gamma_quantile_remap(double a1, double x, double a2) {
  const double target = gamma_p(a1, x);
  // Bracket then bisect/Newton on P(a2, y) = target.
  double lo = 1e-300, hi = x > 1.0 ? x : 1.0;
  while (gamma_p(a2, hi) < target && hi < 1e300) hi *= 2.0;
  double y = x;
  for (int it = 0; it < 200; ++it) {
    const double p = gamma_p(a2, y);
    const double pdf = std::exp(gamma_logpdf(a2, y));
    double step = pdf > 1e-280 ? (p - target) / pdf : 0.0;
    double y_new = y - step;
    if (!(y_new > lo) || !(y_new < hi) || step == 0.0) y_new = 0.5 * (lo + hi);
    if (gamma_p(a2, y_new) < target)
      lo = y_new;
    else
      hi = y_new;
    if (std::fabs(y_new - y) < 1e-14 * (1.0 + std::fabs(y))) return y_new;
    y = y_new;
  }
  return y;
}

}  // namespace hduva
