#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "deltastar/optimizer.hpp"

using namespace deltastar;

namespace {

constexpr double kPi = std::numbers::pi;

Directions random_dirs(int n, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  Directions d;
  for (int i = 0; i < n; ++i) d.push_back(Vec3(nd(rng), nd(rng), nd(rng)).normalized());
  return d;
}

Eigen::Matrix3d random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> nd;
  return Eigen::Quaterniond(nd(rng), nd(rng), nd(rng), nd(rng)).normalized().toRotationMatrix();
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ParseError;
}

const Mesh& search_mesh(double L) {
  static const Mesh m5 = build_mesh(5.0, MeshParams{4, 8, 3.0});
  static const Mesh m1 = build_mesh(1.0, MeshParams{4, 8, 3.0});
  return L == 5.0 ? m5 : m1;
}

}  // namespace

TEST(Gauge, Examples) {
  auto d = gauge_embed({kPi}, 2);
  EXPECT_NEAR(chord_sq(d[0], d[1]), 4.0, 1e-15);
  auto z = gauge_embed({0.0}, 2);
  EXPECT_EQ(code_of([&] { make_star(z, 1.0, 0.0); }), ErrorCode::CoincidentArms);
  EXPECT_EQ(code_of([] { gauge_embed({1.0, 2.0}, 2); }), ErrorCode::SizeMismatch);
  EXPECT_EQ(code_of([] { gauge_embed({}, 1); }), ErrorCode::BadParameters);
  EXPECT_EQ(gauge_dimension(12), 21);
}

TEST(Gauge, AzimuthPeriodicity) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> U(-4.0, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(gauge_dimension(5));
    for (double& v : p) v = U(rng);
    auto a = gram_multiset(gauge_embed(p, 5));
    for (std::size_t k = 2; k < p.size(); k += 2) {
      auto q = p;
      q[k] += 2 * kPi;
      auto b = gram_multiset(gauge_embed(q, 5));
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
    }
  }
}

TEST(Gauge, FixThenEmbedIsCongruent) {
  std::mt19937 rng(2);
  for (int n : {2, 3, 6, 12}) {
    auto d = random_dirs(n, rng);
    auto e = gauge_embed(gauge_fix(d), n);
    EXPECT_NEAR(e[0].z(), 1.0, 1e-15);
    EXPECT_NEAR(e[1].y(), 0.0, 1e-15);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) EXPECT_NEAR(d[i].dot(d[j]), e[i].dot(e[j]), 1e-13);
  }
}

TEST(Objective, AntipodalIsSegment) {
  const Mesh& arm = search_mesh(5.0);
  const double e = objective({kPi}, 2, 5.0, 0.0, arm);
  const auto seg = principal_eigenvalue(make_star({Vec3(0, 0, 1)}, 10.0, 0.0), mirror_mesh(arm), 0.0);
  EXPECT_NEAR(e, seg.levels.front().energy, 1e-8 * std::abs(e));
}

TEST(Objective, NarrowAngleFarBelow) {
  const Mesh& m = search_mesh(5.0);
  const double top = objective({kPi}, 2, 5.0, 0.0, m);
  const double narrow = objective({0.05}, 2, 5.0, 0.0, m);
  EXPECT_TRUE(std::isfinite(narrow));
  EXPECT_LT(narrow, 10.0 * top);
  EXPECT_EQ(objective({5e-4}, 2, 5.0, 0.0, m), kSentinel);
  // no bound state: sentinel rather than an error
  EXPECT_EQ(objective({kPi}, 2, 1.0, 2.0, search_mesh(1.0)), kSentinel);
}

TEST(Objective, RelabelingInvariance) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    auto d = random_dirs(4, rng);
    auto p = gauge_fix(d);
    auto q = p;
    std::swap(q[1], q[3]);
    std::swap(q[2], q[4]);
    const double a = objective(p, 4, 1.0, -0.1, search_mesh(1.0)), b = objective(q, 4, 1.0, -0.1, search_mesh(1.0));
    ASSERT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(Objective, GaugeEquivalentVectors) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    auto d = random_dirs(4, rng);
    Directions moved;
    auto R = random_rotation(rng);
    for (int i : {2, 0, 3, 1}) moved.push_back(R * d[i]);
    const double a = objective(gauge_fix(d), 4, 1.0, -0.1, search_mesh(1.0));
    const double b = objective(gauge_fix(moved), 4, 1.0, -0.1, search_mesh(1.0));
    ASSERT_TRUE(std::isfinite(a));
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(Objective, MatchesPrincipalEigenvalue) {
  SolverOptions tight;
  tight.kappa_tol = 1e-14;
  for (int n : {3, 4}) {
    const Mesh& m = search_mesh(5.0);
    const double e = objective(gauge_fix(sharp_configuration(n)), n, 5.0, 0.0, m, tight);
    const double ref = principal_eigenvalue(make_star(sharp_configuration(n), 5.0, 0.0), m, 0.0, tight).levels[0].energy;
    EXPECT_NEAR(e, ref, 1e-12 * std::abs(ref)) << n;
  }
}

TEST(Rng, CounterBasedStreams) {
  SplitMix64 a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_NE(x, c.next());
  }
  EXPECT_EQ(random_start(5, 9, 2), random_start(5, 9, 2));
  EXPECT_NE(random_start(5, 9, 2), random_start(5, 9, 3));
}

TEST(KernelSum, CongruentInputsGiveZero) {
  std::mt19937 rng(5);
  for (int n : {3, 4, 6, 12}) {
    auto s = sharp_configuration(n);
    EXPECT_EQ(kernel_sum_compare(s, s, 1.0, default_kernel_samples(1.0)).max_abs_gap, 0.0);
    Directions r;
    auto R = random_rotation(rng);
    for (const auto& v : s) r.push_back(R * v);
    EXPECT_LT(kernel_sum_compare(r, s, 1.0, default_kernel_samples(1.0)).max_abs_gap, 1e-14);
  }
}

TEST(KernelSum, PerturbedOctahedron) {
  SplitMix64 rng(1, 0);
  auto s = sharp_configuration(6);
  auto rep = kernel_sum_compare(perturb_directions(s, 0.1, rng), s, 1.0, default_kernel_samples(1.0));
  ASSERT_EQ(rep.gaps.size(), 25u);
  for (double g : rep.gaps) EXPECT_GT(g, 0.0);
}

TEST(KernelSum, TwoArms) {
  auto s = sharp_configuration(2);
  for (double phi : {0.3, 1.0, 2.5, 3.1}) {
    Directions d{Vec3(0, 0, 1), Vec3(std::sin(phi), 0, std::cos(phi))};
    EXPECT_GT(kernel_sum_compare(d, s, 1.0, default_kernel_samples(2.0)).min_gap, 0.0) << phi;
  }
}

TEST(KernelSum, RandomConfigsDominateSharp) {
  std::mt19937 rng(6);
  for (int n : {3, 4, 6, 12}) {
    auto s = sharp_configuration(n);
    for (double kappa : {0.5, 2.0})
      for (int trial = 0; trial < 100; ++trial)
        EXPECT_GE(kernel_sum_compare(random_dirs(n, rng), s, kappa, default_kernel_samples(1.0)).min_gap, -1e-12);
  }
  EXPECT_EQ(code_of([] { kernel_sum_compare(sharp_configuration(3), sharp_configuration(4), 1.0, {{1, 1}}); }),
            ErrorCode::SizeMismatch);
}

TEST(NelderMead, Quadratic) {
  auto f = [](const std::vector<double>& x) { return -(x[0] - 1) * (x[0] - 1) - 2 * (x[1] + 0.5) * (x[1] + 0.5); };
  auto r = nelder_mead_max(f, {0.0, 0.0}, 0.3, 1e-14, 1e-7, 2000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-5);
  EXPECT_NEAR(r.x[1], -0.5, 1e-5);
}

class OptimizeSeeds : public ::testing::TestWithParam<int> {};

TEST_P(OptimizeSeeds, RecoversSharp) {
  const int N = GetParam();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    OptSettings st;
    st.seed = seed;
    auto r = optimize(N, 5.0, 0.0, st);
    ASSERT_TRUE(r.congruent_to_sharp.has_value());
    EXPECT_TRUE(*r.congruent_to_sharp) << "seed " << seed << " deviation " << r.sharp_deviation;
    EXPECT_EQ(r.best_energy, *std::max_element(r.per_start_trace.begin(), r.per_start_trace.end()));
    EXPECT_GE(r.kernel_sum_gap, -1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(SmallN, OptimizeSeeds, ::testing::Values(2, 3, 4));

TEST(Optimize, DeterministicAcrossThreads) {
  OptSettings st;
  st.starts = 3;
  auto a = optimize(2, 5.0, 0.0, st);
  st.threads = 3;
  auto b = optimize(2, 5.0, 0.0, st);
  EXPECT_EQ(a.per_start_trace, b.per_start_trace);
  EXPECT_EQ(a.best_params, b.best_params);
}

TEST(Optimize, Errors) {
  EXPECT_EQ(code_of([] { optimize(1, 5.0, 0.0); }), ErrorCode::BadParameters);
  OptSettings st;
  st.starts = 2;
  // far too weak to bind anywhere
  EXPECT_EQ(code_of([&] { optimize(2, 0.1, 5.0, st); }), ErrorCode::AllStartsFailed);
}

TEST(VerifySharp, OctahedronLocalMax) {
  auto rep = verify_sharp_local_max(6, 5.0, 0.0, 0.1, 20, 1);
  EXPECT_TRUE(rep.pass) << rep.margin;
  EXPECT_EQ(rep.perturbed_energy.size(), 20u);
  EXPECT_GT(rep.margin, 0.0);
}

TEST(VerifySharp, ZeroScaleIsDegenerate) {
  auto rep = verify_sharp_local_max(3, 5.0, 0.0, 0.0, 20, 1);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(code_of([] { verify_sharp_local_max(5, 5.0, 0.0, 0.1, 2, 1); }), ErrorCode::UnsupportedN);
}
