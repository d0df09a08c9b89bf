#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "deltastar/error.hpp"

namespace deltastar {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/**
 * Brent's zero finder on a bracket [a,b] with f(a), f(b) of opposite sign.
 * Every step stays inside the bracket: bisection unless the secant or
 * inverse-quadratic step is clearly better. Stops when the bracket is below
 * xtol (absolute) or f vanishes.
 */
template <class F>
RootResult brent_root(F&& f, double a, double b, double fa, double fb, double xtol, int max_iter = 200) {
  if (!(fa * fb <= 0.0)) fail(ErrorCode::BracketFailure, "brent_root: endpoints do not bracket a root");
  RootResult res;
  if (fa == 0.0) return {a, fa, 0};
  if (fb == 0.0) return {b, fb, 0};
  double c = a, fc = fa, d = b - a, e = d;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < max_iter; ++it) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * xtol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) {
      res.x = b;
      res.fx = fb;
      return res;
    }
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa, p, q;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
    ++res.evaluations;
  }
  fail(ErrorCode::NotConverged, "brent_root: iteration limit");
}

}  // namespace deltastar
