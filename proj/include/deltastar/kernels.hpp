#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "deltastar/error.hpp"
#include "deltastar/quadrature.hpp"

namespace deltastar {

/// Digamma at 1, minus the Euler-Mascheroni constant.
inline constexpr double kPsiOne = -0.57721566490153286;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

struct PairKernelParams {
  double kappa = 1.0;
  double s = 0.0;
  double t = 0.0;
};

/// Free resolvent kernel exp(-kappa r)/(4 pi r).
inline double green_kernel(double kappa, double r) {
  if (!(kappa >= 0.0)) fail(ErrorCode::DomainError, "kappa must be nonnegative");
  if (!(r > 0.0)) fail(ErrorCode::ZeroDistance, "green kernel at r <= 0");
  return std::exp(-kappa * r) / (kFourPi * r);
}

/// Distance between the point at s on one arm and t on another, chord_sq apart.
inline double arm_distance(double s, double t, double chord_sq) {
  double d = s - t;
  return std::sqrt(std::max(0.0, d * d + s * t * chord_sq));
}

/// Kernel as a function of chord-squared x, a=(s-t)^2, b=st.
inline double pair_kernel(const PairKernelParams& p, double x) {
  double r = arm_distance(p.s, p.t, x);
  if (!(r > 0.0)) fail(ErrorCode::ZeroDistance, "pair kernel at coinciding points");
  return green_kernel(p.kappa, r);
}

/// Eigenvalue of the two-dimensional point interaction with parameter alpha.
inline double point_eigenvalue(double alpha) {
  return -4.0 * std::exp(2.0 * (-2.0 * std::numbers::pi * alpha + kPsiOne));
}

/**
 * tau(phi) = sqrt2/(4pi) * int_0^{pi/2} dth / sqrt(sin2th (1 - cos phi sin2th)).
 * The integrand is symmetric about pi/4; the substitution th = u^2 removes the
 * inverse square root at 0.
 */
inline double offdiag_norm_bound(double phi) {
  if (!(phi > 0.0) || phi > std::numbers::pi) fail(ErrorCode::DomainError, "angle must lie in (0, pi]");
  const double c = std::cos(phi);
  const double one_minus_c = 2.0 * std::sin(0.5 * phi) * std::sin(0.5 * phi);
  auto f = [&](double u) {
    if (u == 0.0) return 2.0 / std::sqrt(2.0);
    double th = u * u;
    double s2 = std::sin(2.0 * th);
    // 1 - c s2 = (1 - c) + c (1 - s2), 1 - s2 = 2 sin^2(pi/4 - th)
    double q = std::sin(0.25 * std::numbers::pi - th);
    double den = one_minus_c + c * 2.0 * q * q;
    return 2.0 * u / std::sqrt(s2 * den);
  };
  double I = 2.0 * quad::integrate_adaptive(f, 0.0, std::sqrt(0.25 * std::numbers::pi), 1e-13);
  return std::sqrt(2.0) / kFourPi * I;
}

struct MonotonicityOrder {
  int order = 0;
  bool pass = true;
  std::vector<double> derivative;  // finite-difference estimates on the grid
};

struct MonotonicityReport {
  std::vector<MonotonicityOrder> orders;
  bool all_pass() const {
    for (const auto& o : orders)
      if (!o.pass) return false;
    return true;
  }
};

/// Central differences of x -> pair_kernel(p, x); checks (-1)^k f^(k) > 0 on the grid.
inline MonotonicityReport complete_monotonicity_probe(const PairKernelParams& p, int max_order,
                                                      const std::vector<double>& x_grid) {
  if (max_order < 0 || max_order > 6) fail(ErrorCode::BadParameters, "max_order must be in [0,6]");
  if (x_grid.empty()) fail(ErrorCode::BadParameters, "empty grid");
  if (!(p.kappa > 0.0) || p.s < 0.0 || p.t < 0.0) fail(ErrorCode::DomainError, "kernel parameters out of range");
  if (!(p.s * p.t > 0.0) && p.s == p.t) fail(ErrorCode::DomainError, "distance vanishes on the grid");
  double spacing = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(x_grid[i] > 0.0) || x_grid[i] > 4.0) fail(ErrorCode::DomainError, "grid points must lie in (0,4]");
    for (std::size_t j = i + 1; j < x_grid.size(); ++j)
      spacing = std::min(spacing, std::abs(x_grid[i] - x_grid[j]));
  }
  double h = std::isfinite(spacing) ? std::max(1e-4, spacing / 4.0) : 0.125;

  MonotonicityReport rep;
  for (int k = 0; k <= max_order; ++k) {
    MonotonicityOrder o;
    o.order = k;
    for (double x : x_grid) {
      // binomial stencil at x + (j - k/2) h, j = 0..k
      double acc = 0.0, mag = 0.0, binom = 1.0;
      for (int j = 0; j <= k; ++j) {
        double f = pair_kernel(p, x + (j - 0.5 * k) * h);
        double sgn = ((k - j) % 2 == 0) ? 1.0 : -1.0;
        acc += sgn * binom * f;
        mag += binom * std::abs(f);
        binom = binom * (k - j) / (j + 1);
      }
      double d = acc / std::pow(h, k);
      double noise = std::numeric_limits<double>::epsilon() * mag / std::pow(h, k);
      if (k > 0 && noise > 0.1 * std::abs(d))
        fail(ErrorCode::GridTooCoarse, "finite differences dominated by rounding at order " + std::to_string(k));
      o.derivative.push_back(d);
      double signed_d = (k % 2 == 0) ? d : -d;
      if (!(signed_d > 0.0)) o.pass = false;
    }
    rep.orders.push_back(std::move(o));
  }
  return rep;
}

}  // namespace deltastar
