#pragma once
// Independent oracles shared by the unit tests and the acceptance binary.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// truncated Taylor series c[0] + c[1] h + ... ; exact derivative oracle
using Series = std::vector<double>;

inline Series series_sqrt(const Series& u) {
  const std::size_t n = u.size();
  Series r(n, 0.0);
  r[0] = std::sqrt(u[0]);
  for (std::size_t k = 1; k < n; ++k) {
    double s = u[k];
    for (std::size_t j = 1; j < k; ++j) s -= r[j] * r[k - j];
    r[k] = s / (2.0 * r[0]);
  }
  return r;
}

inline Series series_exp(const Series& a) {
  const std::size_t n = a.size();
  Series e(n, 0.0);
  e[0] = std::exp(a[0]);
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += j * a[j] * e[k - j];
    e[k] = s / k;
  }
  return e;
}

inline Series series_div(const Series& a, const Series& b) {
  const std::size_t n = a.size();
  Series q(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double s = a[k];
    for (std::size_t j = 1; j <= k; ++j) s -= b[j] * q[k - j];
    q[k] = s / b[0];
  }
  return q;
}

/// k-th derivative of x -> exp(-kappa sqrt(a+bx)) / (4 pi sqrt(a+bx)) at x0.
inline double kernel_derivative(double kappa, double s, double t, double x0, int k) {
  const double a = (s - t) * (s - t), b = s * t;
  Series u(k + 1, 0.0);
  u[0] = a + b * x0;
  if (k >= 1) u[1] = b;
  Series r = series_sqrt(u);
  Series mk(k + 1);
  for (int i = 0; i <= k; ++i) mk[i] = -kappa * r[i];
  Series num = series_exp(mk);
  Series den(k + 1);
  for (int i = 0; i <= k; ++i) den[i] = 4.0 * std::numbers::pi * r[i];
  Series f = series_div(num, den);
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return f[k] * fact;
}

/// tanh-sinh quadrature on (0,b), singularity allowed at 0
template <class F>
double tanh_sinh(F&& f, double b, double h = 1.0 / 64.0) {
  double sum = 0.0;
  for (int k = -400; k <= 400; ++k) {
    const double t = k * h;
    const double u = 0.5 * std::numbers::pi * std::sinh(t);
    const double w = 0.5 * std::numbers::pi * std::cosh(t) / (std::cosh(u) * std::cosh(u));
    // x = b (1 + tanh u)/2 = b / (1 + exp(-2u)), accurate near 0
    const double x = b / (1.0 + std::exp(-2.0 * u));
    if (!(x > 0.0) || x >= b || w < 1e-300) continue;
    sum += w * f(x);
  }
  return 0.5 * b * h * sum;
}

}  // namespace oracle
