#include <gtest/gtest.h>

#include <random>

#include "deltastar/geometry.hpp"

using namespace deltastar;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  return q.normalized().toRotationMatrix();
}

Directions rotate(const Directions& d, const Eigen::Matrix3d& R) {
  Directions out;
  for (const auto& v : d) out.push_back(R * v);
  return out;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ParseError;  // sentinel: nothing thrown
}

}  // namespace

TEST(MakeStar, AcceptsAntipodalPair) {
  auto s = make_star({Vec3(0, 0, 1), Vec3(0, 0, -1)}, 1.0, 0.0);
  EXPECT_EQ(s.arms(), 2);
  EXPECT_DOUBLE_EQ(s.arm_length(), 1.0);
}

TEST(MakeStar, Rejections) {
  EXPECT_EQ(code_of([] { make_star({Vec3(0, 0, 1), Vec3(0, 0, 1)}, 1.0, 0.0); }), ErrorCode::CoincidentArms);
  EXPECT_EQ(code_of([] { make_star({Vec3(0, 0, 2)}, 1.0, 0.0); }), ErrorCode::NonUnitDirection);
  EXPECT_EQ(code_of([] { make_star({Vec3(0, 0, 1)}, -1.0, 0.0); }), ErrorCode::NonpositiveLength);
  EXPECT_EQ(code_of([] { make_star({}, 1.0, 0.0); }), ErrorCode::BadParameters);
}

TEST(MakeStar, RenormalizesNearUnit) {
  auto s = make_star({Vec3(0, 0, 1.0 + 5e-10)}, 1.0, 0.0);
  EXPECT_NEAR(s.directions()[0].norm(), 1.0, 1e-15);
}

TEST(ChordSq, Examples) {
  EXPECT_DOUBLE_EQ(chord_sq(Vec3(0, 0, 1), Vec3(0, 0, -1)), 4.0);
  EXPECT_NEAR(chord_sq(Vec3(0, 0, 1), Vec3(1, 0, 0)), 2.0, 1e-15);
  auto t = sharp_configuration(4);
  EXPECT_NEAR(chord_sq(t[0], t[1]), 8.0 / 3.0, 1e-14);
}

TEST(ChordSq, SymmetricAndRotationInvariant) {
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 200; ++k) {
    Vec3 a = Vec3(nd(rng), nd(rng), nd(rng)).normalized(), b = Vec3(nd(rng), nd(rng), nd(rng)).normalized();
    auto R = random_rotation(rng);
    EXPECT_EQ(chord_sq(a, b), chord_sq(b, a));
    EXPECT_NEAR(chord_sq(R * a, R * b), chord_sq(a, b), 1e-12);
  }
}

TEST(Sharp, InnerProductMultisets) {
  for (int n : {2, 3, 4, 6, 12}) {
    const auto d = sharp_configuration(n);
    ASSERT_EQ(static_cast<int>(d.size()), n);
    const auto fam = sharp_family(n);
    for (const auto& v : d) EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    for (double g : gram_multiset(d)) {
      double best = 1.0;
      for (double ref : fam.inner_products) best = std::min(best, std::abs(g - ref));
      EXPECT_LT(best, 1e-14) << "N=" << n << " inner product " << g;
    }
  }
  // counts for the octahedron and icosahedron
  auto count = [](const std::vector<double>& g, double v) {
    return std::count_if(g.begin(), g.end(), [&](double x) { return std::abs(x - v) < 1e-12; });
  };
  auto g6 = gram_multiset(sharp_configuration(6));
  EXPECT_EQ(count(g6, -1.0), 3);
  EXPECT_EQ(count(g6, 0.0), 12);
  auto g12 = gram_multiset(sharp_configuration(12));
  EXPECT_EQ(count(g12, -1.0), 6);
  EXPECT_EQ(count(g12, 1.0 / std::sqrt(5.0)), 30);
  EXPECT_EQ(count(g12, -1.0 / std::sqrt(5.0)), 30);
}

TEST(Sharp, UnsupportedN) {
  EXPECT_EQ(code_of([] { sharp_configuration(5); }), ErrorCode::UnsupportedN);
  EXPECT_EQ(code_of([] { sharp_family(7); }), ErrorCode::UnsupportedN);
}

TEST(Congruent, Examples) {
  std::mt19937 rng(11);
  auto tet = sharp_configuration(4);
  EXPECT_TRUE(congruent(tet, rotate(tet, random_rotation(rng)), 1e-9));

  const double h = 1.0 / std::sqrt(2.0);
  Directions pyramid{Vec3(0, 0, 1), Vec3(h, 0, -h), Vec3(-h, 0, -h), Vec3(0, h, -h)};
  EXPECT_FALSE(congruent(tet, pyramid, 1e-3));

  // octahedron with one vertex rotated by 0.1 rad toward another
  auto oct = sharp_configuration(6);
  auto moved = oct;
  moved[0] = Vec3(std::sin(0.1), 0, std::cos(0.1));
  // oracle: inner product of the moved vertex with (1,0,0) is sin 0.1, far from {-1,0}
  EXPECT_NEAR(moved[0].dot(oct[1]), std::sin(0.1), 1e-15);
  EXPECT_FALSE(congruent(oct, moved, 1e-3));

  EXPECT_EQ(code_of([&] { congruent(tet, oct, 1e-9); }), ErrorCode::SizeMismatch);
}

TEST(Congruent, EquivalenceOnZoo) {
  std::mt19937 rng(3);
  std::vector<Directions> zoo;
  for (int n : {4, 6}) {
    auto s = sharp_configuration(n);
    zoo.push_back(s);
    zoo.push_back(rotate(s, random_rotation(rng)));
    zoo.push_back(rotate(s, random_rotation(rng)));
  }
  const double h = 1.0 / std::sqrt(2.0);
  zoo.push_back({Vec3(0, 0, 1), Vec3(h, 0, -h), Vec3(-h, 0, -h), Vec3(0, h, -h)});
  for (const auto& a : zoo) {
    EXPECT_TRUE(congruent(a, a, 1e-12));
    for (const auto& b : zoo) {
      if (a.size() != b.size()) continue;
      EXPECT_EQ(congruent(a, b, 1e-9), congruent(b, a, 1e-9));
      for (const auto& c : zoo) {
        if (c.size() != a.size()) continue;
        if (congruent(a, b, 1e-9) && congruent(b, c, 1e-9)) EXPECT_TRUE(congruent(a, c, 1e-9));
      }
    }
  }
}

TEST(Design, SharpFamiliesAtTheirOrder) {
  for (int n : {2, 3, 4, 6, 12}) {
    const int t = sharp_family(n).design_order();
    auto rep = spherical_design_check(sharp_configuration(n), t);
    EXPECT_TRUE(rep.is_design) << "N=" << n << " order " << t << " dev " << rep.max_deviation;
  }
}

TEST(Design, OctahedronFailsAtFour) {
  auto rep = spherical_design_check(sharp_configuration(6), 4);
  EXPECT_FALSE(rep.is_design);
  // x^4 point mean is 2/6 = 1/3; sphere mean 1/5
  EXPECT_NEAR(rep.max_deviation, 1.0 / 3.0 - 1.0 / 5.0, 1e-14);
}

TEST(Design, IcosahedronOrders) {
  EXPECT_TRUE(spherical_design_check(sharp_configuration(12), 5).is_design);
  auto rep = spherical_design_check(sharp_configuration(12), 6);
  EXPECT_FALSE(rep.is_design);
  EXPECT_GT(rep.max_deviation, 1e-6);
}

TEST(Design, SphereMomentsClosedForm) {
  // z^2 -> 1/3, x^2 y^2 -> 1/15, z^4 -> 1/5, x^2 y^2 z^2 -> 1/105
  EXPECT_NEAR(sphere_monomial_mean(0, 0, 2), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(sphere_monomial_mean(2, 2, 0), 1.0 / 15.0, 1e-15);
  EXPECT_NEAR(sphere_monomial_mean(0, 0, 4), 1.0 / 5.0, 1e-15);
  EXPECT_NEAR(sphere_monomial_mean(2, 2, 2), 1.0 / 105.0, 1e-15);
  EXPECT_EQ(sphere_monomial_mean(1, 0, 2), 0.0);
}
