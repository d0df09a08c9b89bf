#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "deltastar/error.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/kernels.hpp"
#include "deltastar/spectral.hpp"

namespace deltastar {

/// alpha - ln(zeta)/(2 pi): the coupling of the star scaled by zeta.
inline double scaled_coupling(double alpha, double zeta) {
  if (!(zeta > 0.0)) fail(ErrorCode::DomainError, "zeta must be positive");
  return alpha - std::log(zeta) / (2.0 * std::numbers::pi);
}

/// 2 pi exp(2 pi alpha - psi(1)); segments longer than this have a bound state.
inline double segment_existence_length(double alpha) {
  return 2.0 * std::numbers::pi * std::exp(2.0 * std::numbers::pi * alpha - kPsiOne);
}

/**
 * (N/2pi) ln(L/4) + sum_{i!=j} (sqrt2/4pi |ln(1 - cos phi_ij)| + C).
 * ordered=false counts each unordered pair once.
 */
inline double nonexistence_threshold(const StarConfig& config, double C, bool ordered = true) {
  if (!(C > 0.0)) fail(ErrorCode::DomainError, "C must be positive");
  const auto& d = config.directions();
  const int N = config.arms();
  double sum = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      // 1 - cos phi = chord^2 / 2
      const double omc = 0.5 * chord_sq(d[i], d[j]);
      if (!(omc > 0.0)) fail(ErrorCode::DegenerateAngle, "arms " + std::to_string(i) + ", " + std::to_string(j));
      sum += std::sqrt(2.0) / kFourPi * std::abs(std::log(omc)) + C;
    }
  if (ordered) sum *= 2.0;
  return N / (2.0 * std::numbers::pi) * std::log(config.arm_length() / 4.0) + sum;
}

struct SmallAngleBound {
  double lower = 0.0;
  double upper = 0.0;
  int k = 1;
  double phi = 0.0;
  double C = 0.0;
  bool ordered() const { return lower <= upper; }
};

/// E_k^- and E_k^+ with the o(phi) terms dropped.
inline SmallAngleBound small_angle_bounds(double alpha, double L, double phi, int k, double C) {
  if (!(L > 0.0)) fail(ErrorCode::NonpositiveLength, "L must be positive");
  if (!(phi > 0.0) || phi > std::numbers::pi) fail(ErrorCode::DomainError, "phi must lie in (0, pi]");
  if (k < 1) fail(ErrorCode::BadParameters, "k starts at 1");
  const double omc = 2.0 * std::sin(0.5 * phi) * std::sin(0.5 * phi);
  const double box = std::pow(std::numbers::pi * k / L, 2);
  SmallAngleBound b;
  b.k = k;
  b.phi = phi;
  b.C = C;
  b.upper = -2.0 * std::sqrt(2.0) * std::exp(-2.0 * std::numbers::pi * alpha + 2.0 * kPsiOne) / L / std::sqrt(omc) + box;
  b.lower = -4.0 * std::exp(2.0 * (-2.0 * std::numbers::pi * C - 2.0 * std::numbers::pi * alpha + kPsiOne)) / omc + box;
  return b;
}

/// Two arms of length L at angle phi, the first along z.
inline StarConfig two_arm_star(double phi, double L, double alpha) {
  return make_star({Vec3(0, 0, 1), Vec3(std::sin(phi), 0, std::cos(phi))}, L, alpha);
}

struct SmallAngleReport {
  std::vector<double> phi;
  std::vector<double> energy;
  std::vector<double> upper;
  std::vector<bool> converged;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  bool monotone = false;
  bool below_upper = false;
  bool exponent_in_window = false;
  bool pass() const { return monotone && below_upper && exponent_in_window; }
};

/**
 * E_1 of the two-arm star on a decreasing phi grid, then a least-squares fit
 * of ln|E_1| against ln(1 - cos phi) over the grid points within a decade of
 * the smallest angle. Window for p: [0.4, 1.1].
 */
inline SmallAngleReport check_small_angle_scaling(double alpha, double L, const std::vector<double>& phi_grid,
                                                  const std::vector<MeshParams>& ladder = default_ladder(),
                                                  double e_tol = 1e-6) {
  if (phi_grid.size() < 2) fail(ErrorCode::BadParameters, "phi grid needs two points");
  for (std::size_t i = 0; i < phi_grid.size(); ++i) {
    if (!(phi_grid[i] > 0.0) || phi_grid[i] > 0.3) fail(ErrorCode::DomainError, "phi grid must lie in (0, 0.3]");
    if (i > 0 && !(phi_grid[i] < phi_grid[i - 1])) fail(ErrorCode::BadParameters, "phi grid must decrease");
  }
  SmallAngleReport rep;
  rep.monotone = rep.below_upper = true;
  for (double phi : phi_grid) {
    const auto rr = refine_until(two_arm_star(phi, L, alpha), alpha, e_tol, ladder);
    const double e = rr.result.levels.front().energy;
    const double up = small_angle_bounds(alpha, L, phi, 1, 1.0).upper;
    if (!rep.energy.empty() && !(e < rep.energy.back())) rep.monotone = false;
    if (!(e <= up)) rep.below_upper = false;
    rep.phi.push_back(phi);
    rep.energy.push_back(e);
    rep.upper.push_back(up);
    rep.converged.push_back(rr.converged);
  }
  const double phi_min = phi_grid.back();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < rep.phi.size(); ++i) {
    if (rep.phi[i] > 10.0 * phi_min) continue;
    const double x = std::log(2.0 * std::sin(0.5 * rep.phi[i]) * std::sin(0.5 * rep.phi[i]));
    const double y = std::log(std::abs(rep.energy[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) {
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.exponent = -slope;
    rep.exponent_in_window = rep.exponent >= 0.4 && rep.exponent <= 1.1;
  }
  return rep;
}

}  // namespace deltastar
