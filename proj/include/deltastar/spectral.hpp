#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "deltastar/discretization.hpp"
#include "deltastar/error.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/rootfind.hpp"

namespace deltastar {

struct SolverOptions {
  double kappa_floor = 1e-4;
  double kappa_tol = 1e-10;   // relative
  double kappa_hint = 0.0;    // warm start, ignored when <= kappa_floor
  double kappa_max = 1e8;
};

struct Level {
  int j = 1;
  double kappa = 0.0;
  double energy = 0.0;
  double residual = 0.0;
  int evaluations = 0;
};

enum class Parity { Symmetric, Antisymmetric };

inline const char* to_string(Parity p) { return p == Parity::Symmetric ? "symmetric" : "antisymmetric"; }

struct SpectralResult {
  std::vector<Level> levels;
  bool ground_vector_positivity = false;
  double min_component_ratio = 0.0;  // min component / max |component|
  double arm_symmetry_residual = 0.0;
  std::optional<Parity> parity;
  MeshParams mesh;
  int block_size = 0;
  double arm_length = 0.0;
  double residual = 0.0;  // worst level residual
  Eigen::VectorXd ground_vector;
};

namespace detail {

inline Eigen::VectorXd sorted_eigenvalues_desc(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigensolveFailure, "symmetric eigensolver did not converge");
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  if (!ev.allFinite()) fail(ErrorCode::EigensolveFailure, "non-finite eigenvalues");
  return ev;
}

}  // namespace detail

/// Top `count` eigenvalues of Q_kappa, descending.
inline std::vector<double> lambda_curve(const StarConfig& config, const Mesh& mesh, double kappa, int count) {
  if (count < 1) fail(ErrorCode::BadParameters, "count must be positive");
  const auto B = assemble_bs_matrix(config, kappa, mesh);
  const auto ev = detail::sorted_eigenvalues_desc(B.data);
  const int n = std::min<int>(count, static_cast<int>(ev.size()));
  return {ev.data(), ev.data() + n};
}

/// Eigenvalues above alpha at the kappa floor: a lower-bound estimate of the number of bound states.
inline int count_bound_states(const StarConfig& config, const Mesh& mesh, double alpha, double kappa_floor = 1e-4) {
  const auto B = assemble_bs_matrix(config, kappa_floor, mesh);
  const auto ev = detail::sorted_eigenvalues_desc(B.data);
  return static_cast<int>((ev.array() > alpha).count());
}

/// kappa_j with lambda_j(kappa_j) = alpha, bracketed then refined in ln(kappa).
inline Level solve_energy(const StarConfig& config, const Mesh& mesh, double alpha, int j,
                          const SolverOptions& opt = {}) {
  if (j < 1) fail(ErrorCode::BadParameters, "level index starts at 1");
  if (!(opt.kappa_floor > 0.0) || !(opt.kappa_tol > 0.0)) fail(ErrorCode::BadParameters, "solver tolerances");
  Level lv;
  lv.j = j;
  auto g = [&](double u) {
    ++lv.evaluations;
    const auto B = assemble_bs_matrix(config, std::exp(u), mesh);
    const auto ev = detail::sorted_eigenvalues_desc(B.data);
    if (j > ev.size()) fail(ErrorCode::NoCrossing, "level index exceeds matrix dimension");
    return ev[j - 1] - alpha;
  };
  const double u_floor = std::log(opt.kappa_floor), u_max = std::log(opt.kappa_max);
  double u_lo = u_floor, g_lo = 0.0, u_hi = 0.0, g_hi = 0.0;
  bool have_lo = false;
  const bool warm = opt.kappa_hint > opt.kappa_floor;
  double u0 = warm ? std::log(opt.kappa_hint) : std::max(u_floor + std::log(2.0), -std::log(config.arm_length()));
  double step = warm ? std::log(1.1) : std::log(4.0);
  double g0 = g(u0);
  if (g0 > 0.0) {
    u_lo = u0;
    g_lo = g0;
    have_lo = true;
    for (;;) {
      u_hi = std::min(u_lo + step, u_max);
      g_hi = g(u_hi);
      if (g_hi <= 0.0) break;
      if (u_hi >= u_max) fail(ErrorCode::BracketFailure, "no sign change below kappa_max");
      u_lo = u_hi;
      g_lo = g_hi;
      // assembly cost grows with kappa, so the upward step is not doubled past ln 4
      step = std::max(step, std::log(4.0));
    }
  } else {
    u_hi = u0;
    g_hi = g0;
    for (;;) {
      u_lo = std::max(u_hi - step, u_floor);
      g_lo = g(u_lo);
      if (g_lo > 0.0) {
        have_lo = true;
        break;
      }
      if (u_lo <= u_floor) break;
      u_hi = u_lo;
      g_hi = g_lo;
      step *= 2.0;
    }
  }
  if (!have_lo) fail(ErrorCode::NoCrossing, "eigenvalue " + std::to_string(j) + " stays below alpha at the kappa floor");
  const RootResult r = brent_root(g, u_lo, u_hi, g_lo, g_hi, opt.kappa_tol);
  lv.kappa = std::exp(r.x);
  lv.energy = -lv.kappa * lv.kappa;
  lv.residual = std::abs(r.fx);
  return lv;
}

namespace detail {

/// Eigenvector of the largest eigenvalue lambda by shifted inverse iteration.
inline Eigen::VectorXd top_eigenvector(const Eigen::MatrixXd& A, double lambda) {
  const int n = static_cast<int>(A.rows());
  const double shift = lambda + 1e-9 * (1.0 + std::abs(lambda));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A - shift * Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  for (int it = 0; it < 4; ++it) {
    y = lu.solve(y);
    y.normalize();
  }
  if (!y.allFinite()) fail(ErrorCode::EigensolveFailure, "inverse iteration failed");
  if (y.sum() < 0.0) y = -y;
  return y;
}

}  // namespace detail

/// E_1 with eigenvector diagnostics at kappa_1.
inline SpectralResult principal_eigenvalue(const StarConfig& config, const Mesh& mesh, double alpha,
                                           const SolverOptions& opt = {}) {
  SpectralResult res;
  const Level lv = solve_energy(config, mesh, alpha, 1, opt);
  res.levels.push_back(lv);
  res.residual = lv.residual;
  res.mesh = mesh.params();
  res.block_size = mesh.size();
  res.arm_length = config.arm_length();

  const auto B = assemble_bs_matrix(config, lv.kappa, mesh);
  const auto ev = detail::sorted_eigenvalues_desc(B.data);
  const Eigen::VectorXd y = detail::top_eigenvector(B.data, ev[0]);
  res.ground_vector = y;
  const double ymax = y.cwiseAbs().maxCoeff();
  res.min_component_ratio = y.minCoeff() / ymax;
  res.ground_vector_positivity = res.min_component_ratio >= -1e-10;

  const int N = config.arms(), M = mesh.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(M);
  for (int i = 0; i < N; ++i) mean += y.segment(i * M, M);
  mean /= N;
  double worst = 0.0;
  for (int i = 0; i < N; ++i)
    worst = std::max(worst, (y.segment(i * M, M) - mean).cwiseAbs().maxCoeff() / mean.cwiseAbs().maxCoeff());
  res.arm_symmetry_residual = worst;
  if (N == 2) {
    const double diff = (y.segment(0, M) - y.segment(M, M)).norm(), sum = (y.segment(0, M) + y.segment(M, M)).norm();
    res.parity = diff <= sum ? Parity::Symmetric : Parity::Antisymmetric;
  }
  return res;
}

/// The first `levels` bound states (fewer when fewer exist), plus ground-state diagnostics.
inline SpectralResult spectrum(const StarConfig& config, const Mesh& mesh, double alpha, int levels,
                               const SolverOptions& opt = {}) {
  SpectralResult res = principal_eigenvalue(config, mesh, alpha, opt);
  const int count = count_bound_states(config, mesh, alpha, opt.kappa_floor);
  for (int j = 2; j <= std::min(levels, count); ++j) {
    SolverOptions o = opt;
    o.kappa_hint = 0.0;
    Level lv = solve_energy(config, mesh, alpha, j, o);
    res.residual = std::max(res.residual, lv.residual);
    res.levels.push_back(lv);
  }
  return res;
}

struct RefineResult {
  SpectralResult result;
  bool converged = false;
  double observed_order = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> energies;
  std::vector<MeshParams> meshes;
  std::string warning;
};

inline std::vector<MeshParams> default_ladder() { return {{8, 12, 5.0}, {16, 12, 5.0}, {32, 12, 5.0}}; }

/// principal_eigenvalue along a ladder of meshes until |Delta E_1| <= e_tol.
inline RefineResult refine_until(const StarConfig& config, double alpha, double e_tol,
                                 const std::vector<MeshParams>& ladder = default_ladder(),
                                 const SolverOptions& opt = {}) {
  if (ladder.empty()) fail(ErrorCode::BadParameters, "empty mesh ladder");
  RefineResult out;
  SolverOptions o = opt;
  for (const auto& mp : ladder) {
    const Mesh mesh = build_mesh(config.arm_length(), mp);
    out.result = principal_eigenvalue(config, mesh, alpha, o);
    o.kappa_hint = out.result.levels.front().kappa;
    out.energies.push_back(out.result.levels.front().energy);
    out.meshes.push_back(mp);
    const std::size_t k = out.energies.size();
    if (k >= 3) {
      const double d1 = std::abs(out.energies[k - 2] - out.energies[k - 3]);
      const double d2 = std::abs(out.energies[k - 1] - out.energies[k - 2]);
      out.observed_order = std::log2(d1 / d2);
    }
    // a third level is taken when available so that an order can be reported
    const bool order_known = k >= 3 || ladder.size() < 3;
    if (k >= 2 && order_known && std::abs(out.energies[k - 1] - out.energies[k - 2]) <= e_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged)
    out.warning = out.energies.size() < 2 ? "ladder too short to estimate the error" : "ladder exhausted before e_tol";
  return out;
}

}  // namespace deltastar
