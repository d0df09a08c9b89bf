#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "deltastar/discretization.hpp"
#include "deltastar/error.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/kernels.hpp"
#include "deltastar/spectral.hpp"

namespace deltastar {

/// Counter-based stream: the k-th draw depends only on (seed, stream, k).
class SplitMix64 {
 public:
  SplitMix64(std::uint64_t seed, std::uint64_t stream) : state_(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }
  double normal() {
    // Box-Muller, one value per call
    double u1 = uniform(), u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  Vec3 unit_vector() {
    Vec3 v;
    do v = Vec3(normal(), normal(), normal());
    while (v.norm() < 1e-12);
    return v.normalized();
  }

 private:
  std::uint64_t state_;
};

inline int gauge_dimension(int N) { return 2 * N - 3; }

inline Vec3 spherical(double theta, double phi) {
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

/**
 * params = [theta_2, theta_3, phi_3, ..., theta_N, phi_N]. Arm 1 is the north
 * pole, arm 2 lies in the x-z plane. Plain spherical angles, so the map is
 * total and 2pi-periodic in every entry.
 */
inline Directions gauge_embed(const std::vector<double>& params, int N) {
  if (N < 2) fail(ErrorCode::BadParameters, "gauge needs N >= 2");
  if (static_cast<int>(params.size()) != gauge_dimension(N)) fail(ErrorCode::SizeMismatch, "expected 2N-3 parameters");
  Directions d{Vec3(0, 0, 1), spherical(params[0], 0.0)};
  for (int i = 2; i < N; ++i) d.push_back(spherical(params[2 * i - 3], params[2 * i - 2]));
  return d;
}

/// Rotates arm 1 to the north pole and arm 2 into the half plane x >= 0, y = 0; returns the angles.
inline std::vector<double> gauge_fix(const Directions& dirs) {
  const int N = static_cast<int>(dirs.size());
  if (N < 2) fail(ErrorCode::BadParameters, "gauge needs N >= 2");
  const Vec3 e3 = dirs[0].normalized();
  // component of arm 2 orthogonal to arm 1 fixes the x axis; fall back to any orthogonal axis
  Vec3 e1 = dirs[1] - dirs[1].dot(e3) * e3;
  if (e1.norm() < 1e-12) e1 = std::abs(e3.x()) < 0.9 ? Vec3(1, 0, 0) - e3.x() * e3 : Vec3(0, 1, 0) - e3.y() * e3;
  e1.normalize();
  const Vec3 e2 = e3.cross(e1);
  std::vector<double> p;
  p.reserve(gauge_dimension(N));
  auto angles = [&](const Vec3& v, bool with_phi) {
    const double x = v.dot(e1), y = v.dot(e2), z = v.dot(e3);
    p.push_back(std::atan2(std::hypot(x, y), z));
    if (with_phi) p.push_back(std::atan2(y, x));
  };
  angles(dirs[1], false);
  for (int i = 2; i < N; ++i) angles(dirs[i], true);
  return p;
}

inline double min_pairwise_angle(const Directions& d) {
  double best = std::numbers::pi;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j)
      best = std::min(best, 2.0 * std::asin(std::min(1.0, 0.5 * std::sqrt(chord_sq(d[i], d[j])))));
  return best;
}

inline constexpr double kSentinel = -std::numeric_limits<double>::infinity();

/// E_1 of the embedded star; -inf below 1e-3 rad separation or without a bound state.
inline double objective(const std::vector<double>& params, int N, double L, double alpha, const Mesh& mesh,
                        const SolverOptions& opt = {}, double* kappa_out = nullptr) {
  const Directions d = gauge_embed(params, N);
  if (min_pairwise_angle(d) < 1e-3) return kSentinel;
  try {
    const Level lv = solve_energy(make_star(d, L, alpha), mesh, alpha, 1, opt);
    if (kappa_out) *kappa_out = lv.kappa;
    return lv.energy;
  } catch (const Error&) {
    return kSentinel;
  }
}

struct NelderMeadResult {
  std::vector<double> x;
  double f = kSentinel;
  int evaluations = 0;
  bool converged = false;
};

/**
 * Maximizes f by Nelder-Mead. Stops when the spread of values is below
 * f_tol (1 + |f_best|) and every vertex is within x_tol of the best, then
 * restarts once around the best point to catch a collapsed simplex.
 */
template <class F>
NelderMeadResult nelder_mead_max(F&& f, std::vector<double> x0, double step, double f_tol, double x_tol,
                                 int max_evals) {
  const int n = static_cast<int>(x0.size());
  NelderMeadResult out;
  auto eval = [&](const std::vector<double>& x) {
    ++out.evaluations;
    return -f(x);  // minimize the negative
  };
  std::vector<double> best = std::move(x0);
  double f_best = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 2; ++round) {
    std::vector<std::vector<double>> s(n + 1, best);
    std::vector<double> fv(n + 1);
    for (int i = 0; i < n; ++i) s[i + 1][i] += step;
    for (int i = 0; i <= n; ++i) fv[i] = (round > 0 && i == 0) ? f_best : eval(s[i]);
    bool done = false;
    while (out.evaluations < max_evals) {
      std::vector<int> idx(n + 1);
      for (int i = 0; i <= n; ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
      {
        std::vector<std::vector<double>> s2;
        std::vector<double> f2;
        for (int i : idx) {
          s2.push_back(s[i]);
          f2.push_back(fv[i]);
        }
        s.swap(s2);
        fv.swap(f2);
      }
      double diam = 0.0;
      for (int i = 1; i <= n; ++i)
        for (int k = 0; k < n; ++k) diam = std::max(diam, std::abs(s[i][k] - s[0][k]));
      if (std::isfinite(fv[n]) && fv[n] - fv[0] <= f_tol * (1.0 + std::abs(fv[0])) && diam <= x_tol) {
        done = true;
        break;
      }
      std::vector<double> c(n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) c[k] += s[i][k] / n;
      auto along = [&](double t) {
        std::vector<double> y(n);
        for (int k = 0; k < n; ++k) y[k] = c[k] + t * (s[n][k] - c[k]);
        return y;
      };
      auto xr = along(-1.0);
      double fr = eval(xr);
      if (fr < fv[0]) {
        auto xe = along(-2.0);
        double fe = eval(xe);
        if (fe < fr) {
          s[n] = xe;
          fv[n] = fe;
        } else {
          s[n] = xr;
          fv[n] = fr;
        }
      } else if (fr < fv[n - 1]) {
        s[n] = xr;
        fv[n] = fr;
      } else {
        const bool outside = fr < fv[n];
        auto xc = along(outside ? -0.5 : 0.5);
        double fc = eval(xc);
        if (fc < (outside ? fr : fv[n])) {
          s[n] = xc;
          fv[n] = fc;
        } else {
          for (int i = 1; i <= n; ++i) {
            for (int k = 0; k < n; ++k) s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
            fv[i] = eval(s[i]);
          }
        }
      }
    }
    int ib = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    const bool improved = fv[ib] < f_best - f_tol * (1.0 + std::abs(fv[ib]));
    if (fv[ib] < f_best) {
      best = s[ib];
      f_best = fv[ib];
    }
    out.converged = done;
    if (!done || (round > 0 && !improved)) break;
    step = std::max(10.0 * x_tol, 0.1 * step);
  }
  out.x = best;
  out.f = -f_best;
  return out;
}

struct OptSettings {
  int starts = 8;
  std::uint64_t seed = 1;
  double simplex_tol = 1e-10;  // relative spread of objective values
  double x_tol = 1e-4;         // radians
  double step = 0.3;           // initial simplex edge, radians
  int max_evals = 4000;        // per start
  MeshParams mesh{4, 8, 3.0};
  SolverOptions solver{};
  int threads = 1;
};

struct KernelSumReport {
  std::vector<double> gaps;
  double min_gap = 0.0;
  double max_abs_gap = 0.0;
};

/// sum_{i<j} T(|a_i - a_j|^2) - sum_{i<j} T(|b_i - b_j|^2) at each (s,t).
inline KernelSumReport kernel_sum_compare(const Directions& a, const Directions& b, double kappa,
                                          const std::vector<std::pair<double, double>>& samples) {
  if (a.size() != b.size()) fail(ErrorCode::SizeMismatch, "direction sets differ in size");
  if (samples.empty()) fail(ErrorCode::BadParameters, "no (s,t) samples");
  auto chords = [](const Directions& d) {
    std::vector<double> x;
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = i + 1; j < d.size(); ++j) x.push_back(chord_sq(d[i], d[j]));
    return x;
  };
  const auto xa = chords(a), xb = chords(b);
  KernelSumReport r;
  r.min_gap = std::numeric_limits<double>::infinity();
  for (auto [s, t] : samples) {
    const PairKernelParams p{kappa, s, t};
    double sa = 0.0, sb = 0.0;
    for (double x : xa) sa += pair_kernel(p, x);
    for (double x : xb) sb += pair_kernel(p, x);
    r.gaps.push_back(sa - sb);
    r.min_gap = std::min(r.min_gap, sa - sb);
    r.max_abs_gap = std::max(r.max_abs_gap, std::abs(sa - sb));
  }
  return r;
}

/// 5 x 5 grid of (s,t) over (0, L].
inline std::vector<std::pair<double, double>> default_kernel_samples(double L) {
  std::vector<std::pair<double, double>> out;
  for (int i = 1; i <= 5; ++i)
    for (int j = 1; j <= 5; ++j) out.emplace_back(L * i / 5.0, L * (j - 0.5) / 5.0);
  return out;
}

struct StartTrace {
  std::vector<double> initial;
  std::vector<double> final_params;
  double energy = kSentinel;
  int evaluations = 0;
  bool converged = false;
};

struct OptResult {
  Directions best_directions;
  std::vector<double> best_params;
  double best_energy = kSentinel;
  double best_kappa = 0.0;
  int starts = 0;
  std::vector<double> per_start_trace;
  std::vector<StartTrace> traces;
  std::optional<bool> congruent_to_sharp;  // empty when N has no sharp configuration
  double congruence_tol = 5e-3;
  double sharp_deviation = std::numeric_limits<double>::quiet_NaN();
  double kernel_sum_gap = std::numeric_limits<double>::quiet_NaN();
};

/// Random start for `start`: N independent uniform directions, gauge fixed.
inline std::vector<double> random_start(int N, std::uint64_t seed, int start) {
  SplitMix64 rng(seed, static_cast<std::uint64_t>(start));
  Directions d;
  for (int i = 0; i < N; ++i) d.push_back(rng.unit_vector());
  return gauge_fix(d);
}

inline OptResult optimize(int N, double L, double alpha, const OptSettings& st = {}) {
  if (N < 2) fail(ErrorCode::BadParameters, "optimize needs N >= 2");
  if (st.starts < 1) fail(ErrorCode::BadParameters, "starts must be positive");
  if (!(L > 0.0)) fail(ErrorCode::NonpositiveLength, "arm length must be positive");
  const Mesh mesh = build_mesh(L, st.mesh);
  std::vector<StartTrace> traces(st.starts);

  auto run_start = [&](int k) {
    StartTrace tr;
    tr.initial = random_start(N, st.seed, k);
    SolverOptions so = st.solver;
    auto f = [&](const std::vector<double>& x) {
      double kappa = 0.0;
      double e = objective(x, N, L, alpha, mesh, so, &kappa);
      if (std::isfinite(e)) so.kappa_hint = kappa;
      return e;
    };
    auto nm = nelder_mead_max(f, tr.initial, st.step, st.simplex_tol, st.x_tol, st.max_evals);
    tr.final_params = nm.x;
    tr.energy = nm.f;
    tr.evaluations = nm.evaluations;
    tr.converged = nm.converged;
    traces[k] = std::move(tr);
  };

  const int threads = std::clamp(st.threads, 1, st.starts);
  if (threads == 1) {
    for (int k = 0; k < st.starts; ++k) run_start(k);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int k = w; k < st.starts; k += threads) run_start(k);
        } catch (...) {
          errs[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  OptResult r;
  r.starts = st.starts;
  int best = -1;
  for (int k = 0; k < st.starts; ++k) {
    r.per_start_trace.push_back(traces[k].energy);
    if (std::isfinite(traces[k].energy) && (best < 0 || traces[k].energy > traces[best].energy)) best = k;
  }
  r.traces = std::move(traces);
  if (best < 0) fail(ErrorCode::AllStartsFailed, "every start ended in the sentinel region");
  r.best_params = r.traces[best].final_params;
  r.best_directions = gauge_embed(r.best_params, N);
  r.best_energy = r.traces[best].energy;
  r.best_kappa = std::sqrt(-r.best_energy);
  if (is_sharp_n(N)) {
    const Directions sharp = sharp_configuration(N);
    r.congruent_to_sharp = congruent(r.best_directions, sharp, r.congruence_tol);
    r.sharp_deviation = sharp_gram_deviation(r.best_directions);
    r.kernel_sum_gap = kernel_sum_compare(r.best_directions, sharp, r.best_kappa, default_kernel_samples(L)).min_gap;
  }
  return r;
}

struct LocalMaxReport {
  double sharp_energy = 0.0;
  std::vector<double> perturbed_energy;
  double margin = 0.0;  // sharp - best perturbed; positive when every trial is worse
  bool pass = false;
  bool degenerate = false;
};

/// Tangential random perturbation of every arm, renormalized.
inline Directions perturb_directions(const Directions& d, double scale, SplitMix64& rng) {
  Directions out;
  for (const auto& v : d) {
    Vec3 t = rng.unit_vector();
    t -= t.dot(v) * v;
    if (t.norm() < 1e-12) t = v.unitOrthogonal();
    out.push_back((v + scale * t.normalized()).normalized());
  }
  return out;
}

inline LocalMaxReport verify_sharp_local_max(int N, double L, double alpha, double scale, int trials,
                                             std::uint64_t seed, const MeshParams& mp = {4, 8, 3.0},
                                             const SolverOptions& opt = {}) {
  if (!is_sharp_n(N)) fail(ErrorCode::UnsupportedN, "no sharp configuration with " + std::to_string(N) + " points");
  if (!(scale >= 0.0) || trials < 0) fail(ErrorCode::BadParameters, "scale and trials must be nonnegative");
  const Mesh mesh = build_mesh(L, mp);
  const Directions sharp = sharp_configuration(N);
  LocalMaxReport rep;
  double kappa = 0.0;
  rep.sharp_energy = objective(gauge_fix(sharp), N, L, alpha, mesh, opt, &kappa);
  if (!std::isfinite(rep.sharp_energy)) fail(ErrorCode::NoCrossing, "no bound state at the sharp configuration");
  if (scale == 0.0) {
    rep.degenerate = true;
    rep.pass = true;
    return rep;
  }
  SolverOptions o = opt;
  o.kappa_hint = kappa;
  rep.pass = true;
  rep.margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < trials; ++k) {
    SplitMix64 rng(seed, static_cast<std::uint64_t>(k));
    const double e = objective(gauge_fix(perturb_directions(sharp, scale, rng)), N, L, alpha, mesh, o);
    rep.perturbed_energy.push_back(e);
    rep.margin = std::min(rep.margin, rep.sharp_energy - e);
    if (!(e < rep.sharp_energy)) rep.pass = false;
  }
  return rep;
}

}  // namespace deltastar
