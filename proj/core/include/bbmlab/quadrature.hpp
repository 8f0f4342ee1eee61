#pragma once

#include <cmath>
#include <utility>

#include "bbmlab/errors.hpp"

namespace bbmlab {

// Adaptive Simpson quadrature with absolute tolerance.  The recursion reuses
// the three point evaluations of the parent interval and applies the standard
// 1/15 Richardson error estimate.  Integrands are assumed finite on [a,b].
namespace detail {

template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double h6 = (b - a) / 12.0;
  const double left = h6 * (fa + 4.0 * flm + fm);
  const double right = h6 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                 int max_depth = 30) {
  if (!(std::isfinite(a) && std::isfinite(b))) {
    throw domain_error("integration limits must be finite");
  }
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Integrate f over [a, +inf) truncated where the integrand has decayed: blocks
// of fixed width are accumulated until a block contributes less than `floor`
// in absolute value (Airy-type integrands decay super-exponentially, so the
// truncation error is dominated by the first omitted block).
template <class F>
double integrate_to_decay(F&& f, double a, double block = 5.0,
                          double abs_tol = 1e-10, double floor = 1e-14,
                          double max_upper = 400.0) {
  double total = 0.0;
  double lo = a;
  while (lo < max_upper) {
    const double hi = lo + block;
    const double part = integrate(f, lo, hi, abs_tol);
    total += part;
    if (std::abs(part) < floor) break;
    lo = hi;
  }
  return total;
}

}  // namespace bbmlab
