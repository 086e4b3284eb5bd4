#pragma once

#include <cmath>
#include <cstddef>

namespace adra {

struct BisectionResult {
  double root = 0.0;
  int iterations = 0;
  double width = 0.0;
};

// Bisection on [lo, hi] assuming sign(f(lo)) != sign(f(hi)) (or one is zero).
// Stops when the bracket is no wider than `width_tol`, when f hits an exact
// zero, or after `max_iterations` halvings. Returns the bracket midpoint.
template <class F>
BisectionResult bisect(const F& f, double lo, double hi, double width_tol,
                       int max_iterations) {
  double f_lo = f(lo);
  if (f_lo == 0.0) return {lo, 0, 0.0};
  if (f(hi) == 0.0) return {hi, 0, 0.0};
  const bool lo_negative = f_lo < 0.0;

  int it = 0;
  while (it < max_iterations && hi - lo > width_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // no representable midpoint left
    ++it;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return {mid, it, 0.0};
    if ((f_mid < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), it, hi - lo};
}

}  // namespace adra
