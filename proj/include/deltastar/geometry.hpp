#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "deltastar/error.hpp"

namespace deltastar {

using Vec3 = Eigen::Vector3d;
using Directions = std::vector<Vec3>;

/// N arms of common length L from one vertex, with coupling alpha.
class StarConfig {
 public:
  const Directions& directions() const { return dirs_; }
  int arms() const { return static_cast<int>(dirs_.size()); }
  double arm_length() const { return L_; }
  double coupling() const { return alpha_; }

 private:
  friend StarConfig make_star(const Directions&, double, double);
  Directions dirs_;
  double L_ = 1.0;
  double alpha_ = 0.0;
};

/// Validating constructor. Directions within 1e-9 of unit norm are renormalized.
inline StarConfig make_star(const Directions& directions, double L, double alpha) {
  if (directions.empty()) fail(ErrorCode::BadParameters, "star needs at least one arm");
  if (!(L > 0.0) || !std::isfinite(L)) fail(ErrorCode::NonpositiveLength, "arm length must be positive and finite");
  if (!std::isfinite(alpha)) fail(ErrorCode::BadParameters, "coupling must be finite");
  StarConfig s;
  s.dirs_.reserve(directions.size());
  for (const auto& d : directions) {
    double n = d.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-9)
      fail(ErrorCode::NonUnitDirection, "direction norm " + std::to_string(n));
    s.dirs_.push_back(d / n);
  }
  for (std::size_t i = 0; i < s.dirs_.size(); ++i)
    for (std::size_t j = i + 1; j < s.dirs_.size(); ++j)
      if ((s.dirs_[i] - s.dirs_[j]).norm() < 1e-9)
        fail(ErrorCode::CoincidentArms, "arms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
  s.L_ = L;
  s.alpha_ = alpha;
  return s;
}

/// |a - b|^2 for unit vectors, i.e. 2 - 2 a.b, evaluated without cancellation.
inline double chord_sq(const Vec3& a, const Vec3& b) {
  double v = a.dot(b) >= 0.0 ? (a - b).squaredNorm() : 4.0 - (a + b).squaredNorm();
  return std::clamp(v, 0.0, 4.0);
}

inline bool is_sharp_n(int n) { return n == 2 || n == 3 || n == 4 || n == 6 || n == 12; }

struct SharpFamily {
  int n_points = 0;
  std::vector<double> inner_products;  // distinct values, ascending
  int distinct() const { return static_cast<int>(inner_products.size()); }
  int design_order() const { return 2 * distinct() - 1; }
};

inline SharpFamily sharp_family(int n) {
  const double r5 = 1.0 / std::sqrt(5.0);
  switch (n) {
    case 2: return {2, {-1.0}};
    case 3: return {3, {-0.5}};
    case 4: return {4, {-1.0 / 3.0}};
    case 6: return {6, {-1.0, 0.0}};
    case 12: return {12, {-1.0, -r5, r5}};
    default: fail(ErrorCode::UnsupportedN, "no sharp configuration with " + std::to_string(n) + " points");
  }
}

/**
 * Canonical coordinates. First point at the north pole where the family
 * allows it; the second in the x-z half plane x>0. The icosahedron uses the
 * golden-ratio vertices (0,+-1,+-g) and cyclic shifts.
 */
inline Directions sharp_configuration(int n) {
  Directions d;
  switch (n) {
    case 2:
      d = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
      break;
    case 3: {
      const double h = std::sqrt(3.0) / 2.0;
      d = {Vec3(0, 0, 1), Vec3(h, 0, -0.5), Vec3(-h, 0, -0.5)};
      break;
    }
    case 4: {
      const double a = 2.0 * std::sqrt(2.0) / 3.0, b = std::sqrt(2.0) / 3.0, c = std::sqrt(2.0 / 3.0);
      d = {Vec3(0, 0, 1), Vec3(a, 0, -1.0 / 3.0), Vec3(-b, c, -1.0 / 3.0), Vec3(-b, -c, -1.0 / 3.0)};
      break;
    }
    case 6:
      d = {Vec3(0, 0, 1), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(-1, 0, 0), Vec3(0, -1, 0), Vec3(0, 0, -1)};
      break;
    case 12: {
      const double g = std::numbers::phi;
      for (double s1 : {1.0, -1.0})
        for (double s2 : {1.0, -1.0}) {
          d.emplace_back(0, s1, s2 * g);
          d.emplace_back(s1, s2 * g, 0);
          d.emplace_back(s2 * g, 0, s1);
        }
      for (auto& v : d) v.normalize();
      break;
    }
    default:
      fail(ErrorCode::UnsupportedN, "no sharp configuration with " + std::to_string(n) + " points");
  }
  return d;
}

/// Sorted pairwise inner products, i<j.
inline std::vector<double> gram_multiset(const Directions& a) {
  std::vector<double> g;
  g.reserve(a.size() * (a.size() - 1) / 2);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) g.push_back(a[i].dot(a[j]));
  std::sort(g.begin(), g.end());
  return g;
}

/// Same sorted Gram multiset within tol (necessary for congruence, sufficient for the rigid sharp families).
inline bool congruent(const Directions& a, const Directions& b, double tol) {
  if (a.size() != b.size()) fail(ErrorCode::SizeMismatch, "direction sets differ in size");
  auto ga = gram_multiset(a), gb = gram_multiset(b);
  for (std::size_t k = 0; k < ga.size(); ++k)
    if (std::abs(ga[k] - gb[k]) > tol) return false;
  return true;
}

/// Largest deviation of the Gram multiset from the sharp family's values.
inline double sharp_gram_deviation(const Directions& a) {
  auto ga = gram_multiset(a), gs = gram_multiset(sharp_configuration(static_cast<int>(a.size())));
  double dev = 0.0;
  for (std::size_t k = 0; k < ga.size(); ++k) dev = std::max(dev, std::abs(ga[k] - gs[k]));
  return dev;
}

/// Mean of x^a y^b z^c over the unit sphere.
inline double sphere_monomial_mean(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  double lg = std::lgamma((a + 1) / 2.0) + std::lgamma((b + 1) / 2.0) + std::lgamma((c + 1) / 2.0) -
              std::lgamma((a + b + c + 3) / 2.0);
  return 2.0 * std::exp(lg) / (4.0 * std::numbers::pi);
}

struct DesignReport {
  bool is_design = false;
  double max_deviation = 0.0;
  std::array<int, 3> worst{0, 0, 0};
};

/// Compares point means of all monomials of degree <= order with sphere means.
inline DesignReport spherical_design_check(const Directions& points, int order) {
  if (order < 1) fail(ErrorCode::BadParameters, "design order must be >= 1");
  if (points.empty()) fail(ErrorCode::BadParameters, "empty point set");
  DesignReport r;
  for (int a = 0; a <= order; ++a)
    for (int b = 0; a + b <= order; ++b)
      for (int c = 0; a + b + c <= order; ++c) {
        double m = 0.0;
        for (const auto& p : points) m += std::pow(p.x(), a) * std::pow(p.y(), b) * std::pow(p.z(), c);
        m /= static_cast<double>(points.size());
        double dev = std::abs(m - sphere_monomial_mean(a, b, c));
        if (dev > r.max_deviation) {
          r.max_deviation = dev;
          r.worst = {a, b, c};
        }
      }
  r.is_design = r.max_deviation <= 1e-10;
  return r;
}

}  // namespace deltastar
