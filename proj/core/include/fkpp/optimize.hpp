#pragma once

#include <cmath>
#include <utility>

namespace fkpp {

struct ScalarOptimum {
  double argument;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than `tol`.
template <class F>
ScalarOptimum golden_section_max(F&& fn, double lo, double hi, double tol) {
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = fn(c);
  double fd = fn(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = fn(d);
    }
  }
  // The endpoints are never evaluated inside the loop; include them so a
  // maximum sitting on the boundary is reported there.
  ScalarOptimum best{0.5 * (a + b), fn(0.5 * (a + b))};
  for (double x : {lo, hi}) {
    const double fx = fn(x);
    if (fx > best.value) best = {x, fx};
  }
  return best;
}

template <class F>
ScalarOptimum golden_section_min(F&& fn, double lo, double hi, double tol) {
  auto r = golden_section_max([&](double x) { return -fn(x); }, lo, hi, tol);
  return {r.argument, -r.value};
}

/// Bisection for a sign change of `fn` on [lo, hi]; requires fn(lo) and
/// fn(hi) to have opposite signs (or one of them to vanish).
template <class F>
double bisect(F&& fn, double lo, double hi, double tol) {
  double flo = fn(lo);
  if (flo == 0.0) return lo;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = fn(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace fkpp
