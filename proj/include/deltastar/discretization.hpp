#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "deltastar/error.hpp"
#include "deltastar/geometry.hpp"
#include "deltastar/kernels.hpp"
#include "deltastar/quadrature.hpp"

namespace deltastar {

struct MeshParams {
  int panels = 8;
  int order = 12;
  double grading = 2.0;
};

/**
 * Composite Gauss-Legendre mesh on [0,L]. build_mesh puts panels - panels/4
 * panels on [0,L/2], graded toward the vertex, and the rest on [L/2,L],
 * graded toward the free end.
 */
class Mesh {
 public:
  double length() const { return edges_.back(); }
  const MeshParams& params() const { return params_; }
  int panels() const { return static_cast<int>(edges_.size()) - 1; }
  int order() const { return params_.order; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double panel_length(int k) const { return edges_[k + 1] - edges_[k]; }
  double smallest_panel() const {
    double h = length();
    for (int k = 0; k < panels(); ++k) h = std::min(h, panel_length(k));
    return h;
  }

  static Mesh from_edges(std::vector<double> edges, int order, double grading = 0.0) {
    if (edges.size() < 2 || order < 2 || order > 40) fail(ErrorCode::BadParameters, "bad mesh edges or order");
    for (std::size_t k = 0; k + 1 < edges.size(); ++k)
      if (!(edges[k + 1] > edges[k])) fail(ErrorCode::BadParameters, "mesh edges must increase");
    if (edges.front() != 0.0) fail(ErrorCode::BadParameters, "mesh must start at 0");
    Mesh m;
    m.params_ = {static_cast<int>(edges.size()) - 1, order, grading};
    m.edges_ = std::move(edges);
    const auto& g = quad::gauss_legendre(order);
    for (int k = 0; k < m.panels(); ++k) {
      double a = m.edges_[k], h = m.panel_length(k);
      for (int q = 0; q < order; ++q) {
        m.nodes_.push_back(a + 0.5 * h * (1.0 + g.x[q]));
        m.weights_.push_back(0.5 * h * g.w[q]);
      }
    }
    return m;
  }

 private:
  MeshParams params_;
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline Mesh build_mesh(double L, int panels, int order, double grading) {
  if (!(L > 0.0) || !std::isfinite(L)) fail(ErrorCode::BadParameters, "mesh length must be positive");
  if (panels < 2 || panels > 512) fail(ErrorCode::BadParameters, "panels must be in [2,512]");
  if (order < 2 || order > 40) fail(ErrorCode::BadParameters, "order must be in [2,40]");
  if (!(grading >= 1.0) || !std::isfinite(grading) || grading > 16.0)
    fail(ErrorCode::BadParameters, "grading must be in [1,16]");
  const int right = std::max(1, panels / 4), left = panels - right;
  std::vector<double> edges{0.0};
  double tl = 0.0, acc = 0.0;
  for (int k = 0; k < left; ++k) tl += std::pow(grading, k);
  for (int k = 0; k < left; ++k) {
    acc += std::pow(grading, k);
    edges.push_back(0.5 * L * acc / tl);
  }
  double tr = 0.0;
  acc = 0.0;
  for (int k = 0; k < right; ++k) tr += std::pow(grading, k);
  for (int k = right - 1; k >= 0; --k) {
    acc += std::pow(grading, k);
    edges.push_back(0.5 * L + 0.5 * L * acc / tr);
  }
  edges.back() = L;
  Mesh m = Mesh::from_edges(std::move(edges), order, grading);
  return m;
}

inline Mesh build_mesh(double L, const MeshParams& p) { return build_mesh(L, p.panels, p.order, p.grading); }

/// The arm mesh reflected through the vertex and joined: a mesh on [0, 2L].
inline Mesh mirror_mesh(const Mesh& arm) {
  const double L = arm.length();
  std::vector<double> e;
  const auto& a = arm.edges();
  for (auto it = a.rbegin(); it != a.rend(); ++it) e.push_back(L - *it);
  for (std::size_t k = 1; k < a.size(); ++k) e.push_back(L + a[k]);
  e.front() = 0.0;
  return Mesh::from_edges(std::move(e), arm.order(), arm.params().grading);
}

/// Dense symmetric Birman-Schwinger matrix with N x N blocks of size M.
struct BsMatrix {
  Eigen::MatrixXd data;
  int arms = 0;
  int block_size = 0;
  double kappa = 0.0;

  auto block(int i, int j) const { return data.block(i * block_size, j * block_size, block_size, block_size); }
};

namespace detail {

inline constexpr double kLeafTol = 1e-16;   // Bernstein acceptance for composite leaves
inline constexpr double kFarTol = 1e-15;    // far-field acceptance for panel pairs
inline constexpr double kKappaLeaf = 10.0;  // max kappa * length per leaf

inline constexpr double kNegligible = 50.0;  // exp(-kappa r) is dropped once kappa r exceeds this

inline int leaf_points(int p) { return std::max(20, p + 4); }

inline double kappa_cutoff(double kappa) { return kNegligible / kappa; }

struct Panel {
  double a, b;
  double h() const { return b - a; }
  double ref(double s) const { return (2.0 * s - a - b) / (b - a); }
};

/// Lagrange basis of a mesh panel in physical coordinates.
class PanelBasis {
 public:
  explicit PanelBasis(int p) : basis_(quad::gauss_legendre(p).x) {}
  int size() const { return static_cast<int>(basis_.size()); }
  void eval(const Panel& P, double s, double* out) const { basis_.eval(P.ref(s), out); }

 private:
  quad::LagrangeBasis basis_;
};

using Leaves = std::vector<std::pair<double, double>>;
using Block = Eigen::MatrixXd;

inline Leaves kappa_leaves(double a, double b, double kappa, double scale = 1.0) {
  Leaves out;
  quad::subdivide(a, b, [&](double lo, double hi) { return kappa * scale * (hi - lo) <= kKappaLeaf; }, out);
  return out;
}

inline bool leaf_ok(double rho, int n) { return std::pow(rho, -2.0 * n) < kLeafTol; }

/// own panel of the regularized self-interaction, unscaled (no 1/4pi)
inline Block own_panel(const Panel& P, double kappa, const PanelBasis& pb) {
  const int p = pb.size();
  const auto& g = quad::gauss_legendre(p);
  const auto& lam = quad::log_endpoint_moments(p);
  const double h = P.h();
  Block G = Block::Zero(p, p);
  for (int m = 0; m < p; ++m) {
    for (int n = 0; n < p; ++n) G(m, n) = 0.5 * h * (lam[m * p + n] + lam[(p - 1 - m) * p + (p - 1 - n)]);
    G(m, m) += 0.5 * h * g.w[m] * (2.0 * std::log(0.5 * h) + 2.0 * std::numbers::ln2);
  }
  const auto& go = quad::gauss_legendre(p + 6);
  const int nl = leaf_points(p);
  const auto& gi = quad::gauss_legendre(nl);
  std::vector<double> ls(p), lt(p), v(p);
  // the s-integrand only has kappa-scale structure near the panel ends
  Leaves outer;
  quad::subdivide(P.a, P.b,
                  [&](double lo, double hi) {
                    return kappa * (hi - lo) <= kKappaLeaf || hi - lo <= std::min(lo - P.a, P.b - hi);
                  },
                  outer);
  for (auto [lo, hi] : outer) {
    for (std::size_t q = 0; q < go.size(); ++q) {
      const double s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * go.x[q];
      const double ws = 0.5 * (hi - lo) * go.w[q];
      pb.eval(P, s, ls.data());
      std::fill(v.begin(), v.end(), 0.0);
      // split at s, r = |t - s| measured locally
      for (int side = 0; side < 2; ++side) {
        const double rmax = side == 0 ? s - P.a : P.b - s;
        if (rmax <= 0.0) continue;
        const double rc = std::min(rmax, kappa_cutoff(kappa));
        // beyond rc only -ls/r survives
        if (rc < rmax)
          for (int n = 0; n < p; ++n) v[n] -= ls[n] * std::log(rmax / rc);
        for (auto [r0, r1] : kappa_leaves(0.0, rc, kappa)) {
          for (int k = 0; k < nl; ++k) {
            const double r = 0.5 * (r0 + r1) + 0.5 * (r1 - r0) * gi.x[k];
            const double wr = 0.5 * (r1 - r0) * gi.w[k];
            const double t = side == 0 ? s - r : s + r;
            pb.eval(P, t, lt.data());
            const double e = std::exp(-kappa * r);
            for (int n = 0; n < p; ++n) v[n] += wr * (lt[n] * e - ls[n]) / r;
          }
        }
      }
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) G(m, n) += ws * ls[m] * v[n];
    }
  }
  return 0.5 * (G + G.transpose());
}

/// P = [a,c] to the left of Q = [c,d] on one arm; Duffy split at the shared corner.
inline Block adjacent_panels(const Panel& P, const Panel& Q, double kappa, const PanelBasis& pb) {
  const int p = pb.size();
  const double hp = P.h(), hq = Q.h(), c = P.b;
  Block G = Block::Zero(p, p);
  const auto& gx = quad::gauss_legendre(p + 6);
  const int nl = leaf_points(p);
  const auto& ge = quad::gauss_legendre(nl);
  std::vector<double> ls(p), lt(p), acc(p);
  for (int tri = 0; tri < 2; ++tri) {
    // tri 0: u = hp xi, v = hq xi eta;  tri 1: v = hq xi, u = hp xi eta
    const double h1 = tri == 0 ? hp : hq, h2 = tri == 0 ? hq : hp;
    // the distance is xi (h1 + h2 eta) >= xi h1
    const double xi_max = std::min(1.0, kappa_cutoff(kappa) / h1);
    Leaves eta_leaves;
    const double pole = -h1 / h2;
    quad::subdivide(0.0, 1.0,
                    [&](double lo, double hi) {
                      return kappa * h2 * xi_max * (hi - lo) <= kKappaLeaf &&
                             leaf_ok(quad::bernstein_rho(pole, lo, hi), nl);
                    },
                    eta_leaves);
    for (auto [x0, x1] : kappa_leaves(0.0, xi_max, kappa, hp + hq)) {
      for (std::size_t q = 0; q < gx.size(); ++q) {
        const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx.x[q];
        const double wxi = 0.5 * (x1 - x0) * gx.w[q];
        std::fill(acc.begin(), acc.end(), 0.0);
        for (auto [e0, e1] : eta_leaves) {
          for (int k = 0; k < nl; ++k) {
            const double eta = 0.5 * (e0 + e1) + 0.5 * (e1 - e0) * ge.x[k];
            const double weta = 0.5 * (e1 - e0) * ge.w[k];
            const double den = h1 + h2 * eta;
            const double kj = hp * hq * std::exp(-kappa * xi * den) / den;
            const double moving = tri == 0 ? c + hq * xi * eta : c - hp * xi * eta;
            if (tri == 0)
              pb.eval(Q, moving, lt.data());
            else
              pb.eval(P, moving, lt.data());
            for (int n = 0; n < p; ++n) acc[n] += weta * kj * lt[n];
          }
        }
        if (tri == 0) {
          pb.eval(P, c - hp * xi, ls.data());
          for (int m = 0; m < p; ++m)
            for (int n = 0; n < p; ++n) G(m, n) += wxi * ls[m] * acc[n];
        } else {
          pb.eval(Q, c + hq * xi, ls.data());
          for (int m = 0; m < p; ++m)
            for (int n = 0; n < p; ++n) G(m, n) += wxi * acc[m] * ls[n];
        }
      }
    }
  }
  return G;
}

/// Both panels start at the vertex (same panel on two arms). Duffy split at s = t = 0.
inline Block vertex_pair(const Panel& P, double kappa, double x, const PanelBasis& pb) {
  const int p = pb.size();
  const double h = P.h();
  const double c = 1.0 - 0.5 * x;
  const std::complex<double> root(c, std::sqrt(std::max(0.0, 1.0 - c * c)));
  const int nl = leaf_points(p);
  const auto& gx = quad::gauss_legendre(p + 6);
  const auto& ge = quad::gauss_legendre(nl);
  // R(eta) >= R_min; past xi_max the kernel is negligible
  const double r_min = x <= 2.0 ? std::sqrt(x - 0.25 * x * x) : 1.0;
  const double xi_max = std::min(1.0, kappa_cutoff(kappa) / (h * r_min));
  Leaves eta_leaves;
  quad::subdivide(0.0, 1.0,
                  [&](double lo, double hi) {
                    return 2.0 * kappa * h * xi_max * (hi - lo) <= kKappaLeaf &&
                           leaf_ok(quad::bernstein_rho(root, lo, hi), nl);
                  },
                  eta_leaves);
  Block G = Block::Zero(p, p);
  std::vector<double> ls(p), lt(p), acc(p);
  for (auto [x0, x1] : kappa_leaves(0.0, xi_max, kappa, 2.0 * h)) {
    for (std::size_t q = 0; q < gx.size(); ++q) {
      const double xi = 0.5 * (x0 + x1) + 0.5 * (x1 - x0) * gx.x[q];
      const double wxi = 0.5 * (x1 - x0) * gx.w[q];
      std::fill(acc.begin(), acc.end(), 0.0);
      for (auto [e0, e1] : eta_leaves) {
        for (int k = 0; k < nl; ++k) {
          const double eta = 0.5 * (e0 + e1) + 0.5 * (e1 - e0) * ge.x[k];
          const double weta = 0.5 * (e1 - e0) * ge.w[k];
          const double R = std::sqrt((1.0 - eta) * (1.0 - eta) + eta * x);
          const double kj = h * std::exp(-kappa * h * xi * R) / R;
          pb.eval(P, P.a + h * xi * eta, lt.data());
          for (int n = 0; n < p; ++n) acc[n] += weta * kj * lt[n];
        }
      }
      pb.eval(P, P.a + h * xi, ls.data());
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) G(m, n) += wxi * ls[m] * acc[n];
    }
  }
  return G + G.transpose();
}

/**
 * Iterated composite rule for a panel pair that does not share the
 * singular point. Leaves are bisected until the nearest singularity lies
 * outside the Bernstein ellipse that makes the leaf rule accurate. The
 * singularities sit at s = t e^{+-i phi}; x = 0 is the same-arm case.
 */
inline Block cross_panels(const Panel& P, const Panel& Q, double kappa, double x, const PanelBasis& pb) {
  const int p = pb.size();
  const double c = 1.0 - 0.5 * x;
  const std::complex<double> rot(c, std::sqrt(std::max(0.0, 1.0 - c * c)));
  const int nl = leaf_points(p);
  const auto& gl = quad::gauss_legendre(nl);
  Block G = Block::Zero(p, p);
  // the distance is at least |s - t|
  const double rc = kappa_cutoff(kappa);
  const double s_lo = std::max(P.a, Q.a - rc), s_hi = std::min(P.b, Q.b + rc);
  if (!(s_lo < s_hi)) return G;
  Leaves outer;
  quad::subdivide(s_lo, s_hi,
                  [&](double lo, double hi) {
                    return kappa * (hi - lo) <= kKappaLeaf &&
                           leaf_ok(quad::bernstein_rho_segment(Q.a * rot, Q.b * rot, lo, hi), nl);
                  },
                  outer);
  std::vector<double> ls(p), lt(p), acc(p);
  Leaves inner;
  for (auto [s0, s1] : outer) {
    for (int i = 0; i < nl; ++i) {
      const double s = 0.5 * (s0 + s1) + 0.5 * (s1 - s0) * gl.x[i];
      const double ws = 0.5 * (s1 - s0) * gl.w[i];
      inner.clear();
      const std::complex<double> z = s * rot;
      const double ta = std::max(Q.a, s - rc), tb = std::min(Q.b, s + rc);
      if (!(ta < tb)) continue;
      quad::subdivide(ta, tb,
                      [&](double lo, double hi) {
                        return kappa * (hi - lo) <= kKappaLeaf && leaf_ok(quad::bernstein_rho(z, lo, hi), nl);
                      },
                      inner);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (auto [t0, t1] : inner) {
        for (int j = 0; j < nl; ++j) {
          const double t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * gl.x[j];
          const double wt = 0.5 * (t1 - t0) * gl.w[j];
          const double r = arm_distance(s, t, x);
          pb.eval(Q, t, lt.data());
          const double k = wt * std::exp(-kappa * r) / r;
          for (int n = 0; n < p; ++n) acc[n] += k * lt[n];
        }
      }
      pb.eval(P, s, ls.data());
      for (int m = 0; m < p; ++m)
        for (int n = 0; n < p; ++n) G(m, n) += ws * ls[m] * acc[n];
    }
  }
  return G;
}

inline Panel panel_of(const Mesh& mesh, int k) { return {mesh.edges()[k], mesh.edges()[k + 1]}; }

inline bool kappa_far(double kappa, const Panel& P, const Panel& Q) {
  const double gap = std::max({0.0, P.a - Q.b, Q.a - P.b});
  return kappa * std::max(P.h(), Q.h()) <= 3.0 || kappa * gap >= 40.0;
}

/// Smallest distance between points of panel P on one arm and panel Q on another.
inline double panel_distance(const Panel& P, const Panel& Q, double x) {
  const double c = 1.0 - 0.5 * x;
  // for disjoint segments the minimum sits at an endpoint of one of them
  auto point_to = [c, x](double t, const Panel& S) { return arm_distance(std::clamp(t * c, S.a, S.b), t, x); };
  return std::min({point_to(Q.a, P), point_to(Q.b, P), point_to(P.a, Q), point_to(P.b, Q)});
}

/// exp(-kappa r) below e^-50 on the whole pair: any rule will do
inline bool negligible(double kappa, double distance) { return kappa * distance >= kNegligible; }

inline bool far_same_arm(double kappa, const Panel& P, const Panel& Q, int p) {
  if (P.b >= Q.a && Q.b >= P.a) return false;  // touching
  if (negligible(kappa, std::max(P.a - Q.b, Q.a - P.b))) return true;
  const double zs = (Q.a >= P.b) ? Q.a : Q.b;
  const double zt = (P.a >= Q.b) ? P.a : P.b;
  const double rho = std::min(quad::bernstein_rho(zs, P.a, P.b), quad::bernstein_rho(zt, Q.a, Q.b));
  return std::pow(rho, -2.0 * p) < kFarTol && kappa_far(kappa, P, Q);
}

inline bool far_cross(double kappa, double x, const Panel& P, const Panel& Q, int p) {
  if (P.a == 0.0 && Q.a == 0.0) return false;
  if (negligible(kappa, panel_distance(P, Q, x))) return true;
  const double c = 1.0 - 0.5 * x;
  const std::complex<double> rot(c, std::sqrt(std::max(0.0, 1.0 - c * c)));
  const double rho = std::min(quad::bernstein_rho_segment(Q.a * rot, Q.b * rot, P.a, P.b),
                              quad::bernstein_rho_segment(P.a * rot, P.b * rot, Q.a, Q.b));
  return std::pow(rho, -2.0 * p) < kFarTol && kappa_far(kappa, P, Q);
}

/// Writes G (unscaled Galerkin entries) of panel pair (k,l) folded into B, and the mirror.
inline void place(Eigen::MatrixXd& B, const Mesh& mesh, int k, int l, const Block& G) {
  const int p = mesh.order();
  const auto& w = mesh.weights();
  for (int m = 0; m < p; ++m)
    for (int n = 0; n < p; ++n) {
      const int i = k * p + m, j = l * p + n;
      const double v = G(m, n) / (kFourPi * std::sqrt(w[i] * w[j]));
      B(i, j) = v;
      B(j, i) = v;
    }
}

inline void check_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) fail(ErrorCode::DomainError, "kappa must be positive and finite");
}

}  // namespace detail

/// Panel pairs (k,l) that receive near-field (Galerkin) treatment in an off-diagonal block.
inline std::vector<std::vector<bool>> offdiag_near_pairs(double kappa, double chord_sq, const Mesh& mesh) {
  const int np = mesh.panels();
  std::vector<std::vector<bool>> near(np, std::vector<bool>(np, false));
  for (int k = 0; k < np; ++k)
    for (int l = 0; l < np; ++l)
      near[k][l] = !detail::far_cross(kappa, chord_sq, detail::panel_of(mesh, k), detail::panel_of(mesh, l), mesh.order());
  return near;
}

/**
 * Regularized self-interaction of one arm, folded with D^{-1/2} on both sides.
 * Near panel pairs are Galerkin integrals in the Lagrange basis of each
 * panel; well-separated pairs reduce to sqrt(w_m w_n) exp(-kappa r)/(4 pi r).
 */
inline Eigen::MatrixXd assemble_diag_block(double kappa, double L, const Mesh& mesh) {
  detail::check_kappa(kappa);
  if (std::abs(mesh.length() - L) > 1e-12 * L) fail(ErrorCode::BadParameters, "mesh length differs from L");
  const int M = mesh.size(), p = mesh.order(), np = mesh.panels();
  detail::PanelBasis pb(p);
  Eigen::MatrixXd B(M, M);
  const auto& s = mesh.nodes();
  const auto& w = mesh.weights();
  for (int k = 0; k < np; ++k) {
    const auto P = detail::panel_of(mesh, k);
    for (int l = k; l < np; ++l) {
      const auto Q = detail::panel_of(mesh, l);
      if (l == k) {
        detail::place(B, mesh, k, l, detail::own_panel(P, kappa, pb));
      } else if (l == k + 1) {
        detail::place(B, mesh, k, l, detail::adjacent_panels(P, Q, kappa, pb));
      } else if (!detail::far_same_arm(kappa, P, Q, p)) {
        detail::place(B, mesh, k, l, detail::cross_panels(P, Q, kappa, 0.0, pb));
      } else {
        for (int m = 0; m < p; ++m)
          for (int n = 0; n < p; ++n) {
            const int i = k * p + m, j = l * p + n;
            const double r = s[j] - s[i];
            const double v = std::sqrt(w[i] * w[j]) * std::exp(-kappa * r) / (kFourPi * r);
            B(i, j) = v;
            B(j, i) = v;
          }
      }
    }
  }
  return B;
}

/// Coupling between two arms whose directions are chord_sq apart, folded like the diagonal block.
inline Eigen::MatrixXd assemble_offdiag_block(double kappa, double chord_sq, const Mesh& mesh) {
  detail::check_kappa(kappa);
  if (!(chord_sq > 0.0) || chord_sq > 4.0) fail(ErrorCode::DomainError, "chord_sq must lie in (0,4]");
  const int M = mesh.size(), p = mesh.order(), np = mesh.panels();
  detail::PanelBasis pb(p);
  Eigen::MatrixXd B(M, M);
  const auto& s = mesh.nodes();
  const auto& w = mesh.weights();
  for (int k = 0; k < np; ++k) {
    const auto P = detail::panel_of(mesh, k);
    for (int l = k; l < np; ++l) {
      const auto Q = detail::panel_of(mesh, l);
      if (k == 0 && l == 0) {
        detail::place(B, mesh, k, l, detail::vertex_pair(P, kappa, chord_sq, pb));
      } else if (!detail::far_cross(kappa, chord_sq, P, Q, p)) {
        detail::place(B, mesh, k, l, detail::cross_panels(P, Q, kappa, chord_sq, pb));
      } else {
        for (int m = 0; m < p; ++m)
          for (int n = 0; n < p; ++n) {
            const int i = k * p + m, j = l * p + n;
            const double r = arm_distance(s[i], s[j], chord_sq);
            const double v = std::sqrt(w[i] * w[j]) * std::exp(-kappa * r) / (kFourPi * r);
            B(i, j) = v;
            B(j, i) = v;
          }
      }
    }
  }
  return B;
}

/// Full block matrix; the diagonal block is shared, equal chords share one off-diagonal block.
inline BsMatrix assemble_bs_matrix(const StarConfig& config, double kappa, const Mesh& mesh) {
  if (std::abs(mesh.length() - config.arm_length()) > 1e-12 * config.arm_length())
    fail(ErrorCode::BadParameters, "mesh length differs from arm length");
  const int N = config.arms(), M = mesh.size();
  BsMatrix out;
  out.arms = N;
  out.block_size = M;
  out.kappa = kappa;
  out.data.resize(N * M, N * M);
  const Eigen::MatrixXd D = assemble_diag_block(kappa, config.arm_length(), mesh);
  std::map<double, Eigen::MatrixXd> cache;
  const auto& dirs = config.directions();
  for (int i = 0; i < N; ++i) {
    out.data.block(i * M, i * M, M, M) = D;
    for (int j = i + 1; j < N; ++j) {
      const double x = chord_sq(dirs[i], dirs[j]);
      auto it = cache.find(x);
      if (it == cache.end()) it = cache.emplace(x, assemble_offdiag_block(kappa, x, mesh)).first;
      out.data.block(i * M, j * M, M, M) = it->second;
      out.data.block(j * M, i * M, M, M) = it->second.transpose();
    }
  }
  return out;
}

}  // namespace deltastar
