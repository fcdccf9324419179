#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

struct HausdorffBracket {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline bool pure_polytope(const ConvexBody& K) {
  return K.kind() == BodyKind::VPolytope && K.outer_radius() == 0.0;
}

/// Branch-and-bound maximization of |h_K - h_L| over the unit sphere.
/// Nodes are spherical simplices from recursive cross-polytope subdivision;
/// the bound uses the support functions' Lipschitz constant.
inline HausdorffBracket support_gap_bnb(const ConvexBody& K, const ConvexBody& L,
                                        double resolution, std::size_t budget) {
  const std::size_t n = K.dim();
  const double lip = (circumradius_bound(K) - 2.0) + (circumradius_bound(L) - 2.0);

  struct Node {
    std::vector<Vec> corners;
    Vec center;
    double radius = 0.0; // chordal
    double upper = 0.0;
  };
  auto eval = [&](const Vec& u) {
    return std::abs(support_function(K, u) - support_function(L, u));
  };
  // a point of the body attaining the support value in direction u
  auto attaining_point = [&](const ConvexBody& B, const Vec& u) {
    return support_point_base(B, u) + B.outer_radius() * u;
  };
  // First-order certificate over a spherical simplex conv{v_j}/|.|:
  //   h_K(u) - h_L(u) <= max_j (h_K(v_j) - <x_L, v_j>) / |w|
  // for any fixed x_L in L, since h_K is convex-homogeneous and
  // h_L(u) >= <x_L, u>; |w| >= min_j <v_j, center> on the simplex. This is
  // tight to first order, which matters on flat ridges of the gap where the
  // global Lipschitz bound forces uniform refinement.
  auto corner_bound = [&](const std::vector<Vec>& corners, const Vec& center) {
    double m = 1.0;
    for (const auto& v : corners) m = std::min(m, dot(v, center));
    m = std::max(m, 1e-9);
    Vec xk = attaining_point(K, center), xl = attaining_point(L, center);
    double gk = -1e300, gl = -1e300;
    for (const auto& v : corners) {
      gk = std::max(gk, support_function(K, v) - dot(xl, v));
      gl = std::max(gl, support_function(L, v) - dot(xk, v));
    }
    double g = std::max(gk, gl);
    return g >= 0.0 ? g / m : g;
  };
  auto make_node = [&](std::vector<Vec> corners) {
    Node nd;
    nd.corners = std::move(corners);
    Vec s = zero_vec(n);
    for (const auto& cvec : nd.corners) s += cvec;
    nd.center = normalized(s);
    for (const auto& cvec : nd.corners)
      nd.radius = std::max(nd.radius, distance(nd.center, cvec));
    nd.upper = std::min(eval(nd.center) + lip * nd.radius,
                        corner_bound(nd.corners, nd.center));
    return nd;
  };

  auto cmp = [](const Node& a, const Node& b) { return a.upper < b.upper; };
  std::priority_queue<Node, std::vector<Node>, decltype(cmp)> queue(cmp);
  double lo = 0.0;

  // orthant simplices of the cross-polytope
  std::vector<std::vector<Vec>> seeds;
  const std::size_t orthants = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < orthants; ++mask) {
    std::vector<Vec> corners;
    for (std::size_t i = 0; i < n; ++i)
      corners.push_back(basis_vec(n, i, (mask >> i) & 1 ? -1.0 : 1.0));
    seeds.push_back(std::move(corners));
  }
  for (auto& s : seeds) {
    Node nd = make_node(std::move(s));
    lo = std::max(lo, eval(nd.center));
    queue.push(std::move(nd));
  }

  for (std::size_t it = 0; it < budget && !queue.empty(); ++it) {
    Node nd = queue.top();
    if (nd.upper - lo <= resolution) return {lo, nd.upper};
    queue.pop();
    // split the longest edge
    std::size_t ea = 0, eb = 1;
    double elen = 0.0;
    for (std::size_t i = 0; i < nd.corners.size(); ++i)
      for (std::size_t j = i + 1; j < nd.corners.size(); ++j) {
        double d = distance(nd.corners[i], nd.corners[j]);
        if (d > elen) { elen = d; ea = i; eb = j; }
      }
    Vec mid = normalized(nd.corners[ea] + nd.corners[eb]);
    for (std::size_t child = 0; child < 2; ++child) {
      std::vector<Vec> corners = nd.corners;
      corners[child == 0 ? ea : eb] = mid;
      Node ch = make_node(std::move(corners));
      lo = std::max(lo, eval(ch.center));
      if (ch.upper > lo) queue.push(std::move(ch));
    }
  }
  if (queue.empty()) return {lo, lo};
  double hi = queue.top().upper;
  if (hi - lo > resolution)
    fail(ErrorKind::ResolutionNotMet, "hausdorff_distance: bracket not tightened");
  return {lo, hi};
}

} // namespace detail

/// Certified bracket for d_H(K, L). Exact for polytope pairs and
/// concentric-structure balls; branch-and-bound on the support-function gap
/// otherwise.
inline HausdorffBracket hausdorff_bracket(const ConvexBody& K, const ConvexBody& L,
                                          double resolution = 0.0,
                                          std::size_t budget = 2'000'000) {
  if (K.dim() != L.dim()) fail(ErrorKind::InvalidInput, "hausdorff: dim mismatch");
  if (detail::pure_polytope(K) && detail::pure_polytope(L)) {
    double d = 0.0;
    for (const auto& v : K.vertices()) d = std::max(d, distance_to(L, v));
    for (const auto& v : L.vertices()) d = std::max(d, distance_to(K, v));
    return {d, d};
  }
  if (K.kind() == BodyKind::Ball && L.kind() == BodyKind::Ball) {
    double rk = K.radius() + K.outer_radius();
    double rl = L.radius() + L.outer_radius();
    double d = distance(K.center(), L.center()) + std::abs(rk - rl);
    // |c1-c2| + |r1-r2| dominates sup |h_K-h_L| and is attained
    return {d, d};
  }
  if (resolution <= 0.0) {
    double scale = std::max(circumradius_bound(K), circumradius_bound(L)) - 2.0;
    resolution = 1e-4 * std::max(scale, 1e-12);
  }
  return detail::support_gap_bnb(K, L, resolution, budget);
}

/// Conservative value (upper end of the bracket).
inline double hausdorff_distance(const ConvexBody& K, const ConvexBody& L,
                                 double resolution = 0.0) {
  return hausdorff_bracket(K, L, resolution).hi;
}

} // namespace supmeas
