#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supmeas/constants.hpp"
#include "supmeas/error.hpp"
#include "supmeas/lp.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

constexpr double kUnitTol = 1e-12;
constexpr std::size_t kMaxDim = 6;
constexpr std::size_t kMaxVertices = 64;

struct Halfspace {
  Vec normal;  // unit
  double offset; // points x with normal.x <= offset
};

enum class BodyKind { VPolytope, HPolytope, Ball, BallCut };

/// A convex body K + outer_radius * B^n, with K one of four base kinds.
/// Immutable after construction; all operations are pure.
class ConvexBody {
public:
  static ConvexBody vpolytope(std::vector<Vec> vertices, double outer_radius = 0.0) {
    if (vertices.empty()) fail(ErrorKind::InvalidInput, "vpolytope: no vertices");
    if (vertices.size() > kMaxVertices)
      fail(ErrorKind::InvalidInput, "vpolytope: vertex cap exceeded");
    ConvexBody b;
    b.kind_ = BodyKind::VPolytope;
    b.dim_ = vertices[0].size();
    for (const auto& v : vertices)
      if (v.size() != b.dim_) fail(ErrorKind::InvalidInput, "vpolytope: mixed dims");
    b.vertices_ = std::move(vertices);
    b.outer_radius_ = check_rho(outer_radius);
    b.check_dim();
    return b;
  }

  static ConvexBody hpolytope(std::vector<Halfspace> halfspaces, double outer_radius = 0.0);

  static ConvexBody ball(Vec center, double radius, double outer_radius = 0.0) {
    if (radius <= 0.0) return vpolytope({center}, outer_radius);
    ConvexBody b;
    b.kind_ = BodyKind::Ball;
    b.dim_ = center.size();
    b.center_ = std::move(center);
    b.radius_ = radius;
    b.outer_radius_ = check_rho(outer_radius);
    b.check_dim();
    return b;
  }

  static ConvexBody ball_cut(Vec center, double radius, std::vector<Halfspace> halfspaces,
                             double outer_radius = 0.0) {
    if (radius <= 0.0) return vpolytope({center}, outer_radius);
    ConvexBody b;
    b.kind_ = BodyKind::BallCut;
    b.dim_ = center.size();
    b.center_ = std::move(center);
    b.radius_ = radius;
    b.halfspaces_ = std::move(halfspaces);
    b.outer_radius_ = check_rho(outer_radius);
    for (auto& h : b.halfspaces_) b.check_halfspace(h);
    b.check_dim();
    return b;
  }

  BodyKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  double outer_radius() const { return outer_radius_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  const Vec& center() const { return center_; }
  double radius() const { return radius_; }

  ConvexBody with_outer_radius(double rho) const {
    ConvexBody b = *this;
    b.outer_radius_ = check_rho(rho);
    return b;
  }

  ConvexBody translated(const Vec& t) const {
    ConvexBody b = *this;
    for (auto& v : b.vertices_) v += t;
    if (b.kind_ == BodyKind::Ball || b.kind_ == BodyKind::BallCut) b.center_ += t;
    for (auto& h : b.halfspaces_) h.offset += dot(h.normal, t);
    return b;
  }

private:
  void check_dim() const {
    if (dim_ == 0 || dim_ > kMaxDim)
      fail(ErrorKind::InvalidInput, "body dimension must be in 1..6");
  }
  void check_halfspace(const Halfspace& h) const {
    if (h.normal.size() != dim_) fail(ErrorKind::InvalidInput, "halfspace dim mismatch");
    if (std::abs(norm(h.normal) - 1.0) > kUnitTol)
      fail(ErrorKind::InvalidInput, "halfspace normal must be unit");
  }
  static double check_rho(double rho) {
    if (rho < 0.0) fail(ErrorKind::InvalidInput, "outer_radius must be >= 0");
    return rho;
  }

  friend class BodyAccess;
  BodyKind kind_ = BodyKind::VPolytope;
  std::size_t dim_ = 0;
  std::vector<Vec> vertices_;
  std::vector<Halfspace> halfspaces_;
  Vec center_;
  double radius_ = 0.0;
  double outer_radius_ = 0.0;
};

struct ProjectionResult {
  Vec p;
  double d = 0.0;
  std::optional<Vec> u; // defined iff d > 0
};

namespace detail {

/// Wolfe's min-norm-point algorithm on conv(points).
/// Returns the point of the hull nearest the origin.
inline Vec min_norm_point(const std::vector<Vec>& points) {
  const std::size_t dim = points[0].size();
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (norm_sq(points[i]) < norm_sq(points[best])) best = i;
  std::vector<std::size_t> corral{best};
  std::vector<double> w{1.0};
  Vec z = points[best];
  const double scale = 1.0 + norm_sq(points[best]);

  auto affine_min = [&](const std::vector<std::size_t>& S, std::vector<double>& alpha) {
    // solve (1 + G) a = 1, normalize to sum 1; G_ij = s_i . s_j
    const std::size_t k = S.size();
    std::vector<double> M(k * k), rhs(k, 1.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        M[i * k + j] = 1.0 + dot(points[S[i]], points[S[j]]);
    // Gaussian elimination with partial pivoting
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r)
        if (std::abs(M[r * k + col]) > std::abs(M[piv * k + col])) piv = r;
      if (std::abs(M[piv * k + col]) < 1e-13 * scale) return false;
      if (piv != col) {
        for (std::size_t j = 0; j < k; ++j) std::swap(M[piv * k + j], M[col * k + j]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t r = col + 1; r < k; ++r) {
        double f = M[r * k + col] / M[col * k + col];
        if (f == 0.0) continue;
        for (std::size_t j = col; j < k; ++j) M[r * k + j] -= f * M[col * k + j];
        rhs[r] -= f * rhs[col];
      }
    }
    alpha.assign(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
      double s = rhs[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= M[i * k + j] * alpha[j];
      alpha[i] = s / M[i * k + i];
    }
    double tot = 0.0;
    for (double a : alpha) tot += a;
    if (std::abs(tot) < 1e-300) return false;
    for (double& a : alpha) a /= tot;
    return true;
  };

  for (std::size_t outer = 0; outer < 10000; ++outer) {
    // linear minimization over all points
    std::size_t j = 0;
    double bestdot = dot(z, points[0]);
    for (std::size_t i = 1; i < points.size(); ++i) {
      double d = dot(z, points[i]);
      if (d < bestdot - 1e-15 * scale) { bestdot = d; j = i; }
    }
    if (norm_sq(z) <= bestdot + 1e-12 * scale) return z;
    bool have = false;
    for (auto s : corral) have = have || s == j;
    if (!have) { corral.push_back(j); w.push_back(0.0); }

    for (std::size_t inner = 0; inner < 1000; ++inner) {
      std::vector<double> alpha;
      if (!affine_min(corral, alpha)) {
        // degenerate corral: drop the smallest-weight member
        std::size_t drop = 0;
        for (std::size_t i = 1; i < w.size(); ++i)
          if (w[i] < w[drop]) drop = i;
        corral.erase(corral.begin() + static_cast<long>(drop));
        w.erase(w.begin() + static_cast<long>(drop));
        continue;
      }
      bool interior = true;
      for (double a : alpha) interior = interior && a > 1e-12;
      if (interior) {
        w = alpha;
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        if (alpha[i] <= 1e-12) theta = std::min(theta, w[i] / (w[i] - alpha[i]));
      for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = theta * alpha[i] + (1.0 - theta) * w[i];
      for (std::size_t i = w.size(); i-- > 0;) {
        if (w[i] <= 1e-12) {
          corral.erase(corral.begin() + static_cast<long>(i));
          w.erase(w.begin() + static_cast<long>(i));
        }
      }
    }
    z = zero_vec(dim);
    for (std::size_t i = 0; i < corral.size(); ++i) z += w[i] * points[corral[i]];
  }
  return z;
}

/// Dykstra's alternating projections onto an intersection of halfspaces and
/// at most one ball.
inline Vec dykstra_project(const Vec& x, const std::vector<Halfspace>& hs,
                           const Vec* ball_center, double ball_radius,
                           double tol = 1e-10, std::size_t max_sweeps = 10000) {
  const std::size_t nsets = hs.size() + (ball_center ? 1 : 0);
  std::vector<Vec> incr(nsets, zero_vec(x.size()));
  Vec q = x;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double moved = 0.0;
    for (std::size_t s = 0; s < nsets; ++s) {
      Vec y = q + incr[s];
      Vec proj = y;
      if (ball_center && s == 0) {
        Vec d = y - *ball_center;
        double nd = norm(d);
        if (nd > ball_radius) proj = *ball_center + d * (ball_radius / nd);
      } else {
        const Halfspace& h = hs[s - (ball_center ? 1 : 0)];
        double viol = dot(h.normal, y) - h.offset;
        if (viol > 0.0) proj = y - viol * h.normal;
      }
      incr[s] = y - proj;
      moved = std::max(moved, norm(proj - q));
      q = proj;
    }
    if (moved < tol) return q;
    if (sweep + 1 == max_sweeps)
      fail(ErrorKind::ConvergenceFailure, "dykstra_project: sweep limit reached");
  }
  return q;
}

/// Exact projection onto an intersection of halfspaces and at most one ball
/// by a primal active-set method: the working set is treated as equalities,
/// whose projection has a closed form (affine subspace, optionally cut with
/// the sphere), the most violated constraint enters, and the constraint with
/// the most negative multiplier leaves. Falls back to Dykstra if the linear
/// algebra degenerates or the iteration cap is hit.
inline Vec dykstra_project_adaptive(const Vec& x, const std::vector<Halfspace>& hs,
                                    const Vec* ball_center, double ball_radius,
                                    double tol = 1e-10) {
  const double scale = 1.0 + norm(x) + (ball_center ? ball_radius : 0.0);
  const double vtol = 1e-12 * scale;

  {
    bool feas = true;
    if (ball_center) feas = distance(x, *ball_center) <= ball_radius + vtol;
    for (std::size_t i = 0; feas && i < hs.size(); ++i)
      feas = dot(hs[i].normal, x) - hs[i].offset <= vtol;
    if (feas) return x;
  }

  auto solve_small = [](std::vector<double>& M, std::vector<double>& rhs,
                        std::size_t k) -> bool {
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < k; ++r)
        if (std::abs(M[r * k + col]) > std::abs(M[piv * k + col])) piv = r;
      if (std::abs(M[piv * k + col]) < 1e-12) return false;
      if (piv != col) {
        for (std::size_t j = 0; j < k; ++j) std::swap(M[piv * k + j], M[col * k + j]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t r = col + 1; r < k; ++r) {
        double f = M[r * k + col] / M[col * k + col];
        for (std::size_t j = col; j < k; ++j) M[r * k + j] -= f * M[col * k + j];
        rhs[r] -= f * rhs[col];
      }
    }
    for (std::size_t i = k; i-- > 0;) {
      double s = rhs[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= M[i * k + j] * rhs[j];
      rhs[i] = s / M[i * k + i];
    }
    return true;
  };

  // antiparallel halfspace pairs act as equality constraints (a flat slab);
  // one representative per pair stays permanently in the working set, with
  // an unconstrained multiplier
  std::vector<char> in_eq(hs.size(), 0);
  std::vector<std::size_t> E;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (in_eq[i]) continue;
    for (std::size_t j = i + 1; j < hs.size(); ++j) {
      if (in_eq[j]) continue;
      if (norm(hs[i].normal + hs[j].normal) < 1e-9 &&
          std::abs(hs[i].offset + hs[j].offset) < 1e-9 * scale) {
        in_eq[i] = in_eq[j] = 1;
        E.push_back(i);
        break;
      }
    }
  }

  std::vector<std::size_t> W;
  bool ball_on = false;
  bool degenerate = false;

  auto active_ids = [&]() {
    std::vector<std::size_t> ids = E;
    ids.insert(ids.end(), W.begin(), W.end());
    return ids;
  };

  // projection of z onto {a_i . x = b_i : i in E u W}; mult receives the
  // coefficients of z - out in the normals
  auto affine_project = [&](const Vec& z, std::vector<double>* mult) -> Vec {
    const std::vector<std::size_t> ids = active_ids();
    const std::size_t k = ids.size();
    if (k == 0) {
      if (mult) mult->clear();
      return z;
    }
    std::vector<double> G(k * k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] = dot(hs[ids[i]].normal, z) - hs[ids[i]].offset;
      for (std::size_t j = 0; j <= i; ++j)
        G[i * k + j] = G[j * k + i] = dot(hs[ids[i]].normal, hs[ids[j]].normal);
    }
    if (!solve_small(G, rhs, k)) {
      degenerate = true;
      return z;
    }
    Vec out = z;
    for (std::size_t i = 0; i < k; ++i) out -= rhs[i] * hs[ids[i]].normal;
    if (mult) *mult = rhs;
    return out;
  };

  // optimum over the working set (equalities; sphere if the ball is on),
  // with Lagrange multipliers of x - p in the active normals
  auto working_opt = [&](std::vector<double>& lam, double& mu) -> Vec {
    mu = 0.0;
    Vec p = affine_project(x, &lam);
    if (degenerate || !ball_on) return p;
    Vec cl = affine_project(*ball_center, nullptr);
    if (degenerate) return p;
    double rho2 = ball_radius * ball_radius - norm_sq(*ball_center - cl);
    Vec d = p - cl;
    double nd = norm(d);
    if (rho2 < -vtol || nd < vtol) {
      degenerate = true;
      return p;
    }
    p = cl + std::sqrt(std::max(rho2, 0.0)) / nd * d;
    const std::vector<std::size_t> ids = active_ids();
    const std::size_t k = ids.size() + 1;
    std::vector<Vec> cols;
    for (std::size_t i : ids) cols.push_back(hs[i].normal);
    cols.push_back(p - *ball_center);
    Vec resid = x - p;
    std::vector<double> G(k * k), rhs(k);
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] = dot(cols[i], resid);
      for (std::size_t j = 0; j <= i; ++j)
        G[i * k + j] = G[j * k + i] = dot(cols[i], cols[j]);
    }
    if (!solve_small(G, rhs, k)) {
      degenerate = true;
      return p;
    }
    mu = rhs[k - 1];
    lam.assign(rhs.begin(), rhs.end() - 1);
    return p;
  };

  // drop the most negative multiplier among W and the ball (the equality
  // block E is exempt); returns false when KKT holds
  auto drop_negative = [&](const std::vector<double>& lam, double mu) -> bool {
    double worst = -1e-10;
    std::size_t drop = W.size();
    bool drop_ball = false;
    for (std::size_t i = 0; i < W.size(); ++i)
      if (lam[E.size() + i] < worst) { worst = lam[E.size() + i]; drop = i; }
    if (ball_on && mu < worst) { drop_ball = true; drop = W.size(); }
    if (drop_ball) {
      ball_on = false;
      return true;
    }
    if (drop < W.size()) {
      W.erase(W.begin() + static_cast<long>(drop));
      return true;
    }
    return false;
  };

  bool center_interior = false;
  if (ball_center) {
    center_interior = true;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      double v = dot(hs[i].normal, *ball_center) - hs[i].offset;
      center_interior =
          center_interior && (in_eq[i] ? std::abs(v) <= vtol : v < -vtol);
    }
  }

  if (center_interior) {
    // primal feasible-path active set: walk from the ball center toward the
    // working-set optimum, stopping at the first blocking constraint
    Vec z = *ball_center;
    for (std::size_t iter = 0; iter < 300 && !degenerate; ++iter) {
      std::vector<double> lam;
      double mu = 0.0;
      Vec p = working_opt(lam, mu);
      if (degenerate) break;
      Vec d = p - z;
      if (norm(d) <= vtol) {
        if (drop_negative(lam, mu)) continue;
        return p;
      }
      double t = 1.0;
      std::size_t block = hs.size();
      bool block_ball = false;
      for (std::size_t i = 0; i < hs.size(); ++i) {
        if (in_eq[i]) continue;
        bool in = false;
        for (std::size_t j : W) in = in || j == i;
        if (in) continue;
        double ad = dot(hs[i].normal, d);
        if (ad <= vtol) continue;
        double ti = (hs[i].offset - dot(hs[i].normal, z)) / ad;
        if (ti < t) { t = std::max(ti, 0.0); block = i; block_ball = false; }
      }
      if (!ball_on) {
        double A = norm_sq(d);
        double B = 2.0 * dot(z - *ball_center, d);
        double C = norm_sq(z - *ball_center) - ball_radius * ball_radius;
        double disc = B * B - 4.0 * A * C;
        if (disc >= 0.0 && A > 0.0) {
          double ti = (-B + std::sqrt(disc)) / (2.0 * A);
          if (ti >= 0.0 && ti < t) { t = ti; block = hs.size(); block_ball = true; }
        }
      }
      if (t >= 1.0 - 1e-15) {
        z = p;
        if (drop_negative(lam, mu)) continue;
        return z;
      }
      z += t * d;
      if (block_ball)
        ball_on = true;
      else if (block < hs.size())
        W.push_back(block);
      else
        break;
    }
    return dykstra_project(x, hs, ball_center, ball_radius, tol);
  }

  for (std::size_t iter = 0; iter < 200 && !degenerate; ++iter) {
    std::vector<double> lam;
    double mu = 0.0;
    Vec p = working_opt(lam, mu);
    if (degenerate) break;

    // most violated constraint enters
    double worst = vtol;
    std::size_t enter = hs.size();
    bool enter_ball = false;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      if (in_eq[i]) continue;
      bool in = false;
      for (std::size_t j : W) in = in || j == i;
      if (in) continue;
      double v = dot(hs[i].normal, p) - hs[i].offset;
      if (v > worst) { worst = v; enter = i; enter_ball = false; }
    }
    if (ball_center && !ball_on) {
      double v = distance(p, *ball_center) - ball_radius;
      if (v > worst) { worst = v; enter_ball = true; enter = hs.size(); }
    }
    if (enter_ball) {
      ball_on = true;
      continue;
    }
    if (enter < hs.size()) {
      W.push_back(enter);
      continue;
    }

    // feasible: check multipliers, drop the most negative
    double worst_lam = -1e-10;
    std::size_t drop = W.size();
    bool drop_ball = false;
    for (std::size_t i = 0; i < W.size(); ++i)
      if (lam[i] < worst_lam) { worst_lam = lam[i]; drop = i; }
    if (ball_on && mu < worst_lam) { drop_ball = true; drop = W.size(); }
    if (drop_ball) {
      ball_on = false;
      continue;
    }
    if (drop < W.size()) {
      W.erase(W.begin() + static_cast<long>(drop));
      continue;
    }
    return p;
  }

  // fallback for degenerate working sets
  return dykstra_project(x, hs, ball_center, ball_radius, tol);
}

} // namespace detail

/// Nearest point of the base body (ignores outer_radius).
inline Vec project_base(const ConvexBody& K, const Vec& x) {
  switch (K.kind()) {
    case BodyKind::VPolytope: {
      std::vector<Vec> shifted;
      shifted.reserve(K.vertices().size());
      for (const auto& v : K.vertices()) shifted.push_back(v - x);
      return x + detail::min_norm_point(shifted);
    }
    case BodyKind::Ball: {
      Vec d = x - K.center();
      double nd = norm(d);
      if (nd <= K.radius()) return x;
      return K.center() + d * (K.radius() / nd);
    }
    case BodyKind::HPolytope:
      return detail::dykstra_project_adaptive(x, K.halfspaces(), nullptr, 0.0);
    case BodyKind::BallCut: {
      Vec c = K.center();
      return detail::dykstra_project_adaptive(x, K.halfspaces(), &c, K.radius());
    }
  }
  fail(ErrorKind::InvalidInput, "unreachable");
}

/// Metric projection p_K, distance d_K and direction u_K.
inline ProjectionResult project(const ConvexBody& K, const Vec& x) {
  Vec p0 = project_base(K, x);
  double d0 = distance(x, p0);
  double rho = K.outer_radius();
  ProjectionResult r;
  if (d0 <= rho || d0 < 1e-13) {
    r.p = x;
    r.d = 0.0;
    return r;
  }
  Vec u = (x - p0) / d0;
  r.p = rho > 0.0 ? p0 + rho * u : p0;
  r.d = d0 - rho;
  r.u = u;
  return r;
}

inline double distance_to(const ConvexBody& K, const Vec& x) {
  return project(K, x).d;
}

namespace detail {

/// Maximizer of u.x over sphere(c,r) intersected with the active planes,
/// via Gram-Schmidt on the active normals. Returns the candidate point.
inline Vec sphere_planes_maximizer(const Vec& c, double r, const Vec& u,
                                   const std::vector<Halfspace>& act) {
  std::vector<Vec> basis;
  std::vector<double> offs;
  for (const auto& h : act) {
    Vec v = h.normal;
    double off = h.offset;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      double pr = dot(v, basis[i]);
      v -= pr * basis[i];
      off -= pr * offs[i];
    }
    double nv = norm(v);
    if (nv < 1e-9) continue;
    basis.push_back(v / nv);
    offs.push_back(off / nv);
  }
  Vec cA = c;
  for (std::size_t i = 0; i < basis.size(); ++i)
    cA += (offs[i] - dot(cA, basis[i])) * basis[i];
  Vec uA = u;
  for (const auto& bvec : basis) uA -= dot(uA, bvec) * bvec;
  double r2 = r * r - norm_sq(cA - c);
  double nu = norm(uA);
  if (r2 <= 0.0 || nu < 1e-12) return cA;
  return cA + (std::sqrt(r2) / nu) * uA;
}

/// Support point of a ball-with-cuts body: active-set search with closed-form
/// subproblems, certified by feasibility + KKT; Dykstra ascent as fallback.
inline Vec support_point_ballcut(const ConvexBody& K, const Vec& u) {
  const Vec& c = K.center();
  const double r = K.radius();
  const double ftol = 1e-11 * (1.0 + r + norm(c));
  const auto& hs = K.halfspaces();
  auto feasible = [&](const Vec& y, double tol) {
    if (distance(y, c) > r + tol) return false;
    for (const auto& h : hs)
      if (dot(h.normal, y) > h.offset + tol) return false;
    return true;
  };
  Vec x = c + r * u;
  if (feasible(x, ftol)) return x;

  std::vector<std::size_t> act;
  for (std::size_t iter = 0; iter < 200; ++iter) {
    std::vector<Halfspace> planes;
    planes.reserve(act.size());
    for (auto i : act) planes.push_back(hs[i]);
    x = sphere_planes_maximizer(c, r, u, planes);
    // most violated constraint
    std::size_t worst = hs.size();
    double wv = ftol;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      double v = dot(hs[i].normal, x) - hs[i].offset;
      if (v > wv) { wv = v; worst = i; }
    }
    if (worst != hs.size()) {
      bool dup = false;
      for (auto i : act) dup = dup || i == worst;
      if (!dup) { act.push_back(worst); continue; }
      break; // cycling guard: fall through to Dykstra
    }
    // KKT: u = mu (x-c)/r + sum lambda_i a_i with mu, lambda >= 0.
    // Least squares on the active generators; drop the most negative lambda.
    std::vector<Vec> gen;
    Vec radial = x - c;
    double nr = norm(radial);
    bool ball_active = nr > r - 1e-8 * (1.0 + r);
    if (ball_active) gen.push_back(radial / std::max(nr, 1e-300));
    for (auto i : act) gen.push_back(hs[i].normal);
    const std::size_t k = gen.size();
    std::vector<double> G(k * k), rhs(k), lam(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      rhs[i] = dot(gen[i], u);
      for (std::size_t j = 0; j < k; ++j) G[i * k + j] = dot(gen[i], gen[j]);
    }
    // ridge-regularized normal equations (tiny system)
    for (std::size_t i = 0; i < k; ++i) G[i * k + i] += 1e-12;
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t piv = col;
      for (std::size_t rr = col + 1; rr < k; ++rr)
        if (std::abs(G[rr * k + col]) > std::abs(G[piv * k + col])) piv = rr;
      if (piv != col) {
        for (std::size_t j = 0; j < k; ++j) std::swap(G[piv * k + j], G[col * k + j]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (std::size_t rr = col + 1; rr < k; ++rr) {
        double f = G[rr * k + col] / G[col * k + col];
        if (f == 0.0) continue;
        for (std::size_t j = col; j < k; ++j) G[rr * k + j] -= f * G[col * k + j];
        rhs[rr] -= f * rhs[col];
      }
    }
    for (std::size_t i = k; i-- > 0;) {
      double s = rhs[i];
      for (std::size_t j = i + 1; j < k; ++j) s -= G[i * k + j] * lam[j];
      lam[i] = s / G[i * k + i];
    }
    std::size_t dropi = act.size();
    double worst_lam = -1e-8;
    for (std::size_t i = 0; i < act.size(); ++i) {
      double l = lam[i + (ball_active ? 1 : 0)];
      if (l < worst_lam) { worst_lam = l; dropi = i; }
    }
    if (dropi == act.size()) return x; // optimal
    act.erase(act.begin() + static_cast<long>(dropi));
  }

  // fallback: projected gradient ascent through Dykstra
  x = c + r * u;
  for (std::size_t it = 0; it < 500; ++it) {
    Vec next = dykstra_project_adaptive(x + (0.5 * r) * u, hs, &c, r);
    if (distance(next, x) < 1e-12 * (1.0 + r)) return next;
    x = next;
  }
  return x;
}

} // namespace detail

/// Support point: a maximizer of u.x over the base body (outer_radius adds
/// rho*u afterwards when needed).
inline Vec support_point_base(const ConvexBody& K, const Vec& u) {
  switch (K.kind()) {
    case BodyKind::VPolytope: {
      std::size_t best = 0;
      double bd = dot(K.vertices()[0], u);
      for (std::size_t i = 1; i < K.vertices().size(); ++i) {
        double d = dot(K.vertices()[i], u);
        if (d > bd) { bd = d; best = i; }
      }
      return K.vertices()[best];
    }
    case BodyKind::Ball:
      return K.center() + K.radius() * u;
    case BodyKind::BallCut:
      return detail::support_point_ballcut(K, u);
    case BodyKind::HPolytope: {
      const std::size_t n = K.dim();
      // box size from Dykstra-projected origin plus a generous margin
      Vec inner = project_base(K, zero_vec(n));
      double M = 10.0 * (1.0 + norm(inner));
      for (bool grown = true; grown;) {
        grown = false;
        LPProblem p;
        p.vars = n;
        p.c.assign(n, 0.0);
        p.lo.assign(n, -M);
        p.hi.assign(n, M);
        for (std::size_t i = 0; i < n; ++i) p.c[i] = u[i];
        for (const auto& h : K.halfspaces()) {
          std::vector<double> row(n);
          for (std::size_t i = 0; i < n; ++i) row[i] = h.normal[i];
          p.add_row(row, h.offset);
        }
        LPSolution s = lp_solve(p);
        if (s.status == LPStatus::Infeasible)
          fail(ErrorKind::InvalidInput, "hpolytope: empty body");
        Vec x(n);
        bool at_box = false;
        for (std::size_t i = 0; i < n; ++i) {
          x[i] = s.x[i];
          at_box = at_box || std::abs(std::abs(x[i]) - M) < 1e-6 * M;
        }
        if (!at_box || M > 1e12) return x;
        M *= 100.0;
        grown = true;
      }
    }
  }
  fail(ErrorKind::InvalidInput, "unreachable");
}

/// h_K(u) = max_{x in K} x.u (outer_radius rho adds rho).
inline double support_function(const ConvexBody& K, const Vec& u) {
  if (std::abs(norm(u) - 1.0) > kUnitTol)
    fail(ErrorKind::NonUnitDirection, "support_function: |u| != 1");
  return dot(support_point_base(K, u), u) + K.outer_radius();
}

inline ConvexBody ConvexBody::hpolytope(std::vector<Halfspace> halfspaces,
                                        double outer_radius) {
  if (halfspaces.empty()) fail(ErrorKind::InvalidInput, "hpolytope: no halfspaces");
  ConvexBody b;
  b.kind_ = BodyKind::HPolytope;
  b.dim_ = halfspaces[0].normal.size();
  b.halfspaces_ = std::move(halfspaces);
  b.outer_radius_ = check_rho(outer_radius);
  for (auto& h : b.halfspaces_) b.check_halfspace(h);
  b.check_dim();
  // boundedness: no nonzero recession direction; probe via 2n LPs
  // maximize e.d subject to A d <= 0, d in [-1,1]^n
  const std::size_t n = b.dim_;
  for (std::size_t axis = 0; axis < n; ++axis) {
    for (double sign : {1.0, -1.0}) {
      LPProblem p;
      p.vars = n;
      p.c.assign(n, 0.0);
      p.c[axis] = sign;
      p.lo.assign(n, -1.0);
      p.hi.assign(n, 1.0);
      for (const auto& h : b.halfspaces_) {
        std::vector<double> row(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = h.normal[i];
        p.add_row(row, 0.0);
      }
      LPSolution s = lp_solve(p);
      if (s.objective > 1e-9)
        fail(ErrorKind::InvalidInput, "hpolytope: unbounded (recession direction)");
    }
  }
  // nonemptiness probe
  (void)support_point_base(b, basis_vec(n, 0));
  return b;
}

/// Radius of an origin-centered ball containing K + 2 B^n (upper bound).
inline double circumradius_bound(const ConvexBody& K) {
  double R = 0.0;
  switch (K.kind()) {
    case BodyKind::VPolytope:
      for (const auto& v : K.vertices()) R = std::max(R, norm(v));
      break;
    case BodyKind::Ball:
    case BodyKind::BallCut:
      R = norm(K.center()) + K.radius();
      break;
    case BodyKind::HPolytope:
      for (std::size_t axis = 0; axis < K.dim(); ++axis)
        for (double sign : {1.0, -1.0})
          R = std::max(R, std::abs(dot(support_point_base(K, basis_vec(K.dim(), axis, sign)),
                                       basis_vec(K.dim(), axis, sign))));
      R *= std::sqrt(static_cast<double>(K.dim())); // box corner bound
      break;
  }
  return R + K.outer_radius() + 2.0;
}

struct Box {
  Vec lo, hi;
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

/// Axis-aligned bounding box of K_rho (support function in 2n axis
/// directions), inflated by 1e-9.
inline Box bounding_box(const ConvexBody& K, double extra_rho = 0.0) {
  const std::size_t n = K.dim();
  Box box{Vec(n), Vec(n)};
  for (std::size_t i = 0; i < n; ++i) {
    box.hi[i] = support_function(K, basis_vec(n, i, 1.0)) + extra_rho + 1e-9;
    box.lo[i] = -support_function(K, basis_vec(n, i, -1.0)) - extra_rho - 1e-9;
  }
  return box;
}

} // namespace supmeas
