#include <gtest/gtest.h>

#include <numbers>

#include "deltastar/bounds.hpp"

using namespace deltastar;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.57721566490153286;
}  // namespace

TEST(ScaledCoupling, Values) {
  EXPECT_DOUBLE_EQ(scaled_coupling(0.3, 1.0), 0.3);
  EXPECT_NEAR(scaled_coupling(0.3, std::exp(2 * kPi)), -0.7, 1e-15);
  EXPECT_NEAR(scaled_coupling(0.0, 2.0), -0.110318, 1e-6);
  EXPECT_THROW(scaled_coupling(0.0, 0.0), Error);
  EXPECT_THROW(scaled_coupling(0.0, -1.0), Error);
}

TEST(SegmentExistenceLength, Values) {
  EXPECT_NEAR(segment_existence_length(0.0), 2 * kPi * std::exp(kEulerGamma), 1e-12);
  EXPECT_NEAR(segment_existence_length(0.0), 2.0 * std::numbers::pi * std::exp(0.5772156649015329), 1e-12);
  EXPECT_NEAR(segment_existence_length(0.0), 11.1908, 1e-4);
  EXPECT_NEAR(segment_existence_length(kPsiOne / (2 * kPi)), 2 * kPi, 1e-13);
  double prev = 0.0;
  for (double a = -1.0; a <= 1.0; a += 0.1) {
    EXPECT_GT(segment_existence_length(a), prev);
    prev = segment_existence_length(a);
  }
}

TEST(SegmentExistenceLength, LongerSegmentBinds) {
  for (double alpha : {-0.2, 0.0}) {
    const double half = 0.55 * segment_existence_length(alpha);
    auto c = make_star({Vec3(0, 0, 1), Vec3(0, 0, -1)}, half, alpha);
    EXPECT_GE(count_bound_states(c, build_mesh(half, 8, 12, 2.0), alpha), 1) << alpha;
  }
}

TEST(NonexistenceThreshold, Examples) {
  EXPECT_NEAR(nonexistence_threshold(make_star({Vec3(0, 0, 1)}, 4.0, 0.0), 3.0), 0.0, 1e-15);
  auto anti = make_star({Vec3(0, 0, 1), Vec3(0, 0, -1)}, 4.0, 0.0);
  const double one = std::sqrt(2.0) / (4 * kPi) * std::log(2.0) + 1.0;
  EXPECT_NEAR(nonexistence_threshold(anti, 1.0), 2 * one, 1e-14);
  EXPECT_NEAR(nonexistence_threshold(anti, 1.0), 2.156, 1e-3);
  EXPECT_NEAR(nonexistence_threshold(anti, 1.0, false), one, 1e-14);
}

TEST(NonexistenceThreshold, DivergesAsAngleCloses) {
  double prev = 0.0;
  for (double phi : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double t = nonexistence_threshold(two_arm_star(phi, 1.0, 0.0), 1.0);
    EXPECT_GT(t, prev);
    prev = t;
  }
  EXPECT_GT(prev, 3.0);
}

TEST(NonexistenceThreshold, Errors) {
  auto c = make_star(sharp_configuration(3), 1.0, 0.0);
  EXPECT_THROW(nonexistence_threshold(c, 0.0), Error);
  EXPECT_THROW(nonexistence_threshold(c, -1.0), Error);
}

TEST(NonexistenceThreshold, NoBoundStatesAboveIt) {
  // one-sided evidence only: the constant is unknown
  std::vector<StarConfig> configs{make_star(sharp_configuration(2), 1.0, 0.0), make_star(sharp_configuration(4), 2.0, 0.0),
                                  two_arm_star(0.3, 1.0, 0.0), make_star(sharp_configuration(6), 0.5, 0.0)};
  for (const auto& c : configs) {
    const double alpha = nonexistence_threshold(c, 0.5) + 1.0;
    EXPECT_EQ(count_bound_states(c, build_mesh(c.arm_length(), 6, 10, 2.0), alpha), 0);
  }
}

TEST(SmallAngleBounds, Example) {
  const auto b = small_angle_bounds(0.0, 1.0, 0.1, 1, 1.0);
  const double omc = 1.0 - std::cos(0.1);
  EXPECT_NEAR(omc, 0.0049958, 1e-7);
  const double coef = 2 * std::sqrt(2.0) * std::exp(-2 * kEulerGamma);
  EXPECT_NEAR(coef, 0.8917, 1e-4);
  EXPECT_NEAR(b.upper, -coef / std::sqrt(omc) + kPi * kPi, 1e-12);
  EXPECT_NEAR(b.upper, -2.75, 5e-3);
  EXPECT_NEAR(b.lower, -4 * std::exp(2 * (-2 * kPi - kEulerGamma)) / omc + kPi * kPi, 1e-10);
}

TEST(SmallAngleBounds, Rates) {
  const double box = kPi * kPi;
  auto a = small_angle_bounds(0.0, 1.0, 1e-2, 1, 1.0), b = small_angle_bounds(0.0, 1.0, 1e-3, 1, 1.0);
  const double ra = (1 - std::cos(1e-2)) / (1 - std::cos(1e-3));
  EXPECT_NEAR((b.upper - box) / (a.upper - box), std::sqrt(ra), 1e-9 * std::sqrt(ra));
  EXPECT_NEAR((b.lower - box) / (a.lower - box), ra, 1e-9 * ra);
  EXPECT_LT(small_angle_bounds(0.0, 1.0, 1e-6, 1, 1.0).upper, -1e3);
  EXPECT_TRUE(small_angle_bounds(0.0, 1.0, 1e-6, 1, 1.0).ordered());
}

TEST(SmallAngleBounds, LevelShift) {
  for (int k : {2, 3, 5}) {
    auto b1 = small_angle_bounds(0.1, 2.0, 0.2, 1, 0.5), bk = small_angle_bounds(0.1, 2.0, 0.2, k, 0.5);
    const double shift = std::pow(kPi / 2.0, 2) * (k * k - 1);
    EXPECT_NEAR(bk.upper - b1.upper, shift, 1e-12);
    EXPECT_NEAR(bk.lower - b1.lower, shift, 1e-12);
  }
}

TEST(SmallAngleBounds, Errors) {
  EXPECT_THROW(small_angle_bounds(0.0, -1.0, 0.1, 1, 1.0), Error);
  EXPECT_THROW(small_angle_bounds(0.0, 1.0, 0.0, 1, 1.0), Error);
  EXPECT_THROW(small_angle_bounds(0.0, 1.0, 0.1, 0, 1.0), Error);
}

TEST(SmallAngleScaling, DeskGrid) {
  const auto rep = check_small_angle_scaling(0.0, 1.0, {0.2, 0.1, 0.05});
  ASSERT_EQ(rep.energy.size(), 3u);
  EXPECT_TRUE(rep.monotone);
  EXPECT_TRUE(rep.below_upper);
  EXPECT_GE(rep.exponent, 0.4);
  EXPECT_LE(rep.exponent, 1.1);
  EXPECT_TRUE(rep.pass());
  for (bool c : rep.converged) EXPECT_TRUE(c);
}

TEST(SmallAngleScaling, GridValidation) {
  EXPECT_THROW(check_small_angle_scaling(0.0, 1.0, {0.1}), Error);
  EXPECT_THROW(check_small_angle_scaling(0.0, 1.0, {0.5, 0.1}), Error);
  EXPECT_THROW(check_small_angle_scaling(0.0, 1.0, {0.05, 0.1}), Error);
}
