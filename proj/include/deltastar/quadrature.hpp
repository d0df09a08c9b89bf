#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "deltastar/error.hpp"

namespace deltastar::quad {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

inline constexpr int kMaxGauss = 128;

namespace detail {

inline void legendre_pair(int n, double x, double& pn, double& dpn) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  dpn = n * (x * p1 - p0) / (x * x - 1.0);
}

inline Rule compute_gauss_legendre(int n) {
  Rule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  if (n == 1) {
    r.w[0] = 2.0;
    return r;
  }
  for (int i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pn = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, pn, dp);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_pair(n, x, pn, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    double pn = 0.0, dp = 1.0;
    legendre_pair(n, 0.0, pn, dp);
    r.w[n / 2] = 2.0 / (dp * dp);
  }
  return r;
}

}  // namespace detail

/// Gauss-Legendre rule on [-1,1], ascending nodes.
inline const Rule& gauss_legendre(int n) {
  if (n < 1 || n > kMaxGauss) fail(ErrorCode::BadParameters, "gauss_legendre: order out of range");
  static const std::vector<Rule> table = [] {
    std::vector<Rule> t(kMaxGauss + 1);
    for (int k = 1; k <= kMaxGauss; ++k) t[k] = detail::compute_gauss_legendre(k);
    return t;
  }();
  return table[n];
}

/// Lagrange basis through fixed reference nodes, barycentric form.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(std::vector<double> nodes) : x_(std::move(nodes)), bw_(x_.size(), 1.0) {
    for (std::size_t j = 0; j < x_.size(); ++j)
      for (std::size_t k = 0; k < x_.size(); ++k)
        if (k != j) bw_[j] /= (x_[j] - x_[k]);
  }

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& nodes() const { return x_; }

  /// out[j] = l_j(x)
  void eval(double x, double* out) const {
    const std::size_t n = x_.size();
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = x - x_[j];
      if (d == 0.0) {
        for (std::size_t k = 0; k < n; ++k) out[k] = 0.0;
        out[j] = 1.0;
        return;
      }
      out[j] = bw_[j] / d;
      denom += out[j];
    }
    for (std::size_t j = 0; j < n; ++j) out[j] /= denom;
  }

 private:
  std::vector<double> x_;
  std::vector<double> bw_;
};

/// Parameter of the smallest Bernstein ellipse of [a,b] passing through z.
inline double bernstein_rho(std::complex<double> z, double a, double b) {
  std::complex<double> zeta = (2.0 * z - (a + b)) / (b - a);
  std::complex<double> w = std::sqrt(zeta - 1.0) * std::sqrt(zeta + 1.0);
  return std::max(std::abs(zeta + w), std::abs(zeta - w));
}

/// Minimum Bernstein parameter over the segment [z0, z1]. Level sets are
/// confocal ellipses, so the restriction to a line is quasi-convex.
inline double bernstein_rho_segment(std::complex<double> z0, std::complex<double> z1, double a, double b) {
  auto f = [&](double u) { return bernstein_rho(z0 + u * (z1 - z0), a, b); };
  double lo = 0.0, hi = 1.0;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double u1 = hi - g * (hi - lo), u2 = lo + g * (hi - lo);
  double f1 = f(u1), f2 = f(u2);
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = u2;
      u2 = u1;
      f2 = f1;
      u1 = hi - g * (hi - lo);
      f1 = f(u1);
    } else {
      lo = u1;
      u1 = u2;
      f1 = f2;
      u2 = lo + g * (hi - lo);
      f2 = f(u2);
    }
  }
  return std::min({f(0.0), f(1.0), f1, f2});
}

/// Recursive bisection of [a,b] until accept(lo,hi) holds; leaves in order.
template <class Accept>
void subdivide(double a, double b, Accept&& accept, std::vector<std::pair<double, double>>& leaves, int depth = 0) {
  if (depth >= 60 || accept(a, b)) {
    leaves.emplace_back(a, b);
    return;
  }
  double m = 0.5 * (a + b);
  subdivide(a, m, accept, leaves, depth + 1);
  subdivide(m, b, accept, leaves, depth + 1);
}

/// Adaptive Gauss-Kronrod (7/15) for smooth-enough scalar integrands.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-13, int max_depth = 60) {
  static constexpr std::array<double, 8> xk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                               0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                               0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                               0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                               0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                               0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                               0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                               0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  auto gk = [&](double lo, double hi, double& err) {
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double fc = f(c);
    double rk = wk[7] * fc, rg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
      double v = f(c - h * xk[j]) + f(c + h * xk[j]);
      rk += wk[j] * v;
      if (j % 2 == 1) rg += wg[j / 2] * v;
    }
    err = std::abs((rk - rg) * h);
    return rk * h;
  };
  double err0 = 0.0;
  double total = gk(a, b, err0);
  std::function<double(double, double, double, double, int)> rec = [&](double lo, double hi, double whole, double err,
                                                                       int depth) -> double {
    if (err <= rel_tol * std::abs(total) || depth >= max_depth || err == 0.0) return whole;
    double m = 0.5 * (lo + hi);
    double e1 = 0.0, e2 = 0.0;
    double l = gk(lo, m, e1), r = gk(m, hi, e2);
    return rec(lo, m, l, e1, depth + 1) + rec(m, hi, r, e2, depth + 1);
  };
  return rec(a, b, total, err0, 0);
}

/**
 * Moments of products of the Lagrange basis (order p Gauss nodes) against a
 * log endpoint weight: out(m,n) = int_{-1}^{1} l_m(x) l_n(x) ln(1+x) dx.
 * Stored row-major, p*p.
 */
inline const std::vector<double>& log_endpoint_moments(int p) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it != cache.end()) return *it->second;
  const Rule& g = gauss_legendre(p);
  LagrangeBasis basis(g.x);
  const Rule& leaf = gauss_legendre(std::min(kMaxGauss, p + 8));
  auto out = std::make_unique<std::vector<double>>(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> l(p);
  // y = (1+x)/2 in (0,1]; int = 2 int_0^1 F(2y-1) (ln2 + ln y) dy, graded toward y=0
  double hi = 1.0;
  for (int k = 0; k < 80; ++k) {
    double lo = hi * 0.5;
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < leaf.size(); ++q) {
      double y = c + h * leaf.x[q];
      double wt = 2.0 * h * leaf.w[q] * (std::numbers::ln2 + std::log(y));
      basis.eval(2.0 * y - 1.0, l.data());
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) (*out)[m * p + n] += wt * l[m] * l[n];
    }
    hi = lo;
  }
  auto& ref = *out;
  cache.emplace(p, std::move(out));
  return ref;
}

}  // namespace deltastar::quad
