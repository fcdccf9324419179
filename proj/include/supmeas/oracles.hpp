#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/constants.hpp"
#include "supmeas/error.hpp"
#include "supmeas/measure.hpp"
#include "supmeas/sphere_net.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

namespace detail {

/// Orthonormal basis of span{vs} via Gram-Schmidt (rank-revealing,
/// tolerance relative to input scale).
inline std::vector<Vec> orthonormal_basis(const std::vector<Vec>& vs,
                                          double tol = 1e-10) {
  std::vector<Vec> basis;
  for (const auto& v : vs) {
    Vec w = v;
    for (const auto& b : basis) w -= dot(w, b) * b;
    double nw = norm(w);
    if (nw > tol * (1.0 + norm(v))) basis.push_back(w / nw);
  }
  return basis;
}

inline Vec to_coords(const std::vector<Vec>& basis, const Vec& v) {
  Vec y(basis.size());
  for (std::size_t k = 0; k < basis.size(); ++k) y[k] = dot(basis[k], v);
  return y;
}

inline Vec from_coords(const std::vector<Vec>& basis, const Vec& y, const Vec& origin) {
  Vec x = origin;
  for (std::size_t k = 0; k < basis.size(); ++k) x += y[k] * basis[k];
  return x;
}

/// One face of the lattice: the vertex-index set and its affine dimension.
struct PolyFace {
  std::vector<std::size_t> verts; // sorted
  std::size_t dim = 0;
};

struct FaceLattice {
  std::vector<Vec> verts_amb;         // deduplicated ambient vertices
  Vec origin;                         // verts_amb[0]
  std::vector<Vec> hull_basis;        // orthonormal, size d
  std::vector<Vec> perp_basis;        // orthonormal complement, size n-d
  std::vector<Vec> verts;             // hull coordinates (dim d)
  std::vector<PolyFace> faces;        // all proper faces + the top face (last)
  std::vector<Vec> facet_normals;     // hull coords, unit outward, per facet
  std::vector<double> facet_offsets;
  std::vector<std::size_t> facet_ids; // indices into `faces` that are facets
};

inline std::size_t affine_rank(const std::vector<Vec>& pts,
                               const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0;
  std::vector<Vec> diffs;
  for (std::size_t k = 1; k < idx.size(); ++k)
    diffs.push_back(pts[idx[k]] - pts[idx[0]]);
  return orthonormal_basis(diffs).size();
}

/// Null vector of the affine hull of d points in R^d (the hyperplane normal).
inline bool hyperplane_through(const std::vector<Vec>& pts,
                               const std::vector<std::size_t>& idx, Vec& normal,
                               double& offset) {
  const std::size_t d = pts[0].size();
  std::vector<Vec> diffs;
  for (std::size_t k = 1; k < idx.size(); ++k)
    diffs.push_back(pts[idx[k]] - pts[idx[0]]);
  auto basis = orthonormal_basis(diffs);
  if (basis.size() != d - 1) return false; // affinely dependent subset
  // normal: any unit vector orthogonal to the basis
  for (std::size_t axis = 0; axis < d; ++axis) {
    Vec w = basis_vec(d, axis);
    for (const auto& b : basis) w -= dot(w, b) * b;
    double nw = norm(w);
    if (nw > 1e-8) {
      normal = w / nw;
      offset = dot(normal, pts[idx[0]]);
      return true;
    }
  }
  return false;
}

inline FaceLattice build_face_lattice(const std::vector<Vec>& raw_vertices) {
  if (raw_vertices.empty())
    fail(ErrorKind::InvalidInput, "face lattice: no vertices");
  if (raw_vertices.size() > kMaxVertices)
    fail(ErrorKind::FaceEnumerationOverflow, "face lattice: vertex cap exceeded");
  const std::size_t n = raw_vertices[0].size();
  if (n > 4)
    fail(ErrorKind::FaceEnumerationOverflow, "face lattice: n > 4 unsupported");

  FaceLattice L;
  for (const auto& v : raw_vertices) {
    bool dup = false;
    for (const auto& w : L.verts_amb) dup = dup || distance(v, w) < 1e-9;
    if (!dup) L.verts_amb.push_back(v);
  }
  L.origin = L.verts_amb[0];
  std::vector<Vec> diffs;
  for (std::size_t k = 1; k < L.verts_amb.size(); ++k)
    diffs.push_back(L.verts_amb[k] - L.origin);
  L.hull_basis = orthonormal_basis(diffs);
  const std::size_t d = L.hull_basis.size();
  // orthogonal complement
  for (std::size_t axis = 0; axis < n; ++axis) {
    Vec w = basis_vec(n, axis);
    for (const auto& b : L.hull_basis) w -= dot(w, b) * b;
    for (const auto& b : L.perp_basis) w -= dot(w, b) * b;
    double nw = norm(w);
    if (nw > 1e-8) L.perp_basis.push_back(w / nw);
  }
  for (const auto& v : L.verts_amb)
    L.verts.push_back(to_coords(L.hull_basis, v - L.origin));

  const std::size_t m = L.verts.size();
  std::vector<std::size_t> all(m);
  for (std::size_t k = 0; k < m; ++k) all[k] = k;

  std::set<std::vector<std::size_t>> seen;
  if (d >= 1) {
    // candidate facet hyperplanes through d-subsets
    std::vector<std::size_t> idx(d);
    std::vector<std::size_t> stack;
    auto consider = [&](const std::vector<std::size_t>& sub) {
      Vec nu;
      double off;
      if (d == 1) {
        // "hyperplane" in 1D is a point; normal is +-1
        for (double s : {1.0, -1.0}) {
          double o = s * L.verts[sub[0]][0];
          bool supp = true;
          std::vector<std::size_t> on;
          for (std::size_t k = 0; k < m; ++k) {
            double val = s * L.verts[k][0];
            if (val > o + 1e-9) supp = false;
            else if (val > o - 1e-9) on.push_back(k);
          }
          if (supp && seen.insert(on).second) {
            Vec nn(1);
            nn[0] = s;
            L.faces.push_back({on, affine_rank(L.verts, on)});
            L.facet_normals.push_back(nn);
            L.facet_offsets.push_back(o);
            L.facet_ids.push_back(L.faces.size() - 1);
          }
        }
        return;
      }
      if (!hyperplane_through(L.verts, sub, nu, off)) return;
      bool above = false, below = false;
      std::vector<std::size_t> on;
      for (std::size_t k = 0; k < m; ++k) {
        double val = dot(nu, L.verts[k]) - off;
        if (val > 1e-9) above = true;
        else if (val < -1e-9) below = true;
        else on.push_back(k);
      }
      if (above && below) return;
      if (above) { nu = -1.0 * nu; off = -off; } // flip outward
      if (seen.insert(on).second) {
        L.faces.push_back({on, affine_rank(L.verts, on)});
        L.facet_normals.push_back(nu);
        L.facet_offsets.push_back(off);
        L.facet_ids.push_back(L.faces.size() - 1);
      }
    };
    // iterate d-subsets
    std::vector<std::size_t> sub(d);
    std::vector<std::size_t> pos(d);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth,
                                                            std::size_t start) {
      if (depth == d) {
        consider(sub);
        return;
      }
      for (std::size_t k = start; k < m; ++k) {
        sub[depth] = k;
        rec(depth + 1, k + 1);
      }
    };
    rec(0, 0);
  }

  // closure of facet vertex sets under intersection -> all proper faces
  std::set<std::vector<std::size_t>> face_sets(seen);
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<std::vector<std::size_t>> cur(face_sets.begin(), face_sets.end());
    for (std::size_t a = 0; a < cur.size(); ++a)
      for (std::size_t b = a + 1; b < cur.size(); ++b) {
        std::vector<std::size_t> inter;
        std::set_intersection(cur[a].begin(), cur[a].end(), cur[b].begin(),
                              cur[b].end(), std::back_inserter(inter));
        if (!inter.empty() && face_sets.insert(inter).second) grew = true;
      }
  }
  for (const auto& fs : face_sets)
    if (!seen.count(fs)) L.faces.push_back({fs, affine_rank(L.verts, fs)});
  L.faces.push_back({all, d}); // top face
  return L;
}

/// Spherical-polygon area via Gauss-Bonnet (ordered unit vertices on S^2
/// bounding a convex region).
inline double spherical_polygon_area(const std::vector<Vec>& ring) {
  const std::size_t m = ring.size();
  if (m < 3) fail(ErrorKind::InvalidInput, "spherical polygon needs 3+ vertices");
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Vec& v = ring[k];
    const Vec& a = ring[(k + m - 1) % m];
    const Vec& b = ring[(k + 1) % m];
    Vec t1 = a - dot(a, v) * v;
    Vec t2 = b - dot(b, v) * v;
    double n1 = norm(t1), n2 = norm(t2);
    if (n1 < 1e-12 || n2 < 1e-12)
      fail(ErrorKind::InvalidInput, "spherical polygon: degenerate edge");
    double c = std::clamp(dot(t1, t2) / (n1 * n2), -1.0, 1.0);
    sum += std::acos(c);
  }
  return sum - static_cast<double>(m - 2) * std::numbers::pi;
}

/// Spherical triangle area (L'Huilier).
inline double spherical_triangle_area(const Vec& a, const Vec& b, const Vec& c) {
  auto side = [](const Vec& u, const Vec& v) {
    return 2.0 * std::asin(std::clamp(0.5 * distance(u, v), 0.0, 1.0));
  };
  double sa = side(b, c), sb = side(a, c), sc = side(a, b);
  double s = 0.5 * (sa + sb + sc);
  double t = std::tan(0.5 * s) * std::tan(0.5 * (s - sa)) *
             std::tan(0.5 * (s - sb)) * std::tan(0.5 * (s - sc));
  return 4.0 * std::atan(std::sqrt(std::max(t, 0.0)));
}

/// Weighted direction atoms on a sphere subset: directions with weights
/// summing to the subset's Hausdorff measure.
struct SphereAtoms {
  std::vector<Vec> dirs;
  std::vector<double> weights;
  double total = 0.0;

  void add(const Vec& u, double w) {
    dirs.push_back(u);
    weights.push_back(w);
    total += w;
  }
};

/// Pointed-cone spherical set from generators (span dim j), exact for
/// j <= 3; returns atoms with exact total measure.
inline SphereAtoms pointed_cone_atoms(const std::vector<Vec>& gens, double mesh) {
  SphereAtoms out;
  std::vector<Vec> units;
  for (const auto& g : gens) {
    double ng = norm(g);
    if (ng > 1e-12) units.push_back(g / ng);
  }
  auto span = orthonormal_basis(units);
  const std::size_t j = span.size();
  if (j == 0) return out; // empty cone: caller handles the j=0 convention
  if (j == 1) {
    out.add(units[0], 1.0); // H^0 of a single direction
    return out;
  }
  // coordinates in the span
  std::vector<Vec> ys;
  for (const auto& u : units) ys.push_back(to_coords(span, u));
  if (j == 2) {
    std::vector<double> ang;
    for (const auto& y : ys) ang.push_back(std::atan2(y[1], y[0]));
    std::sort(ang.begin(), ang.end());
    // largest gap decides the covered arc
    double maxgap = 2.0 * std::numbers::pi - (ang.back() - ang.front());
    double start = ang.back(), extent;
    for (std::size_t k = 1; k < ang.size(); ++k) {
      double g = ang[k] - ang[k - 1];
      if (g > maxgap) { maxgap = g; start = ang[k - 1]; }
    }
    extent = 2.0 * std::numbers::pi - maxgap;
    if (maxgap < std::numbers::pi - 1e-9) extent = 2.0 * std::numbers::pi; // full circle
    double arc_start = extent >= 2.0 * std::numbers::pi - 1e-12
                           ? 0.0
                           : start + maxgap; // arc begins after the gap
    std::size_t cnt = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                   std::ceil(extent / mesh)));
    for (std::size_t k = 0; k < cnt; ++k) {
      double th = arc_start + extent * (static_cast<double>(k) + 0.5) /
                                  static_cast<double>(cnt);
      Vec y(2);
      y[0] = std::cos(th);
      y[1] = std::sin(th);
      out.add(from_coords(span, y, zero_vec(span[0].size())), extent /
                                                                  static_cast<double>(cnt));
    }
    return out;
  }
  if (j == 3) {
    // extreme rays via the central projection trick: all generators satisfy
    // y . axis > 0 for a pointed cone; project to the plane y.axis = 1 and
    // take the planar convex hull.
    Vec axis = zero_vec(3);
    for (const auto& y : ys) axis += y;
    double na = norm(axis);
    if (na < 1e-10)
      fail(ErrorKind::InvalidInput, "cone atoms: cone not pointed");
    axis = axis / na;
    auto frame = orthonormal_basis({axis, basis_vec(3, 0), basis_vec(3, 1),
                                    basis_vec(3, 2)});
    // frame[0] = axis; frame[1..2] span the plane
    struct P2 { double a, b; std::size_t id; };
    std::vector<P2> pts;
    for (std::size_t k = 0; k < ys.size(); ++k) {
      double h = dot(ys[k], axis);
      if (h < 1e-9) fail(ErrorKind::InvalidInput, "cone atoms: cone not pointed");
      Vec p = ys[k] / h;
      pts.push_back({dot(p, frame[1]), dot(p, frame[2]), k});
    }
    // monotone-chain hull
    std::sort(pts.begin(), pts.end(), [](const P2& x, const P2& y) {
      return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    auto cross = [](const P2& o, const P2& p, const P2& q) {
      return (p.a - o.a) * (q.b - o.b) - (p.b - o.b) * (q.a - o.a);
    };
    std::vector<P2> hull;
    for (int pass = 0; pass < 2; ++pass) {
      std::size_t base = hull.size();
      for (const auto& p : pts) {
        while (hull.size() >= base + 2 &&
               cross(hull[hull.size() - 2], hull.back(), p) <= 1e-18)
          hull.pop_back();
        hull.push_back(p);
      }
      hull.pop_back();
      std::reverse(pts.begin(), pts.end());
    }
    std::vector<Vec> ring;
    for (const auto& p : hull) ring.push_back(ys[p.id]);
    if (ring.size() < 3) {
      // cone is flat (span overshot); fall back to arc handling
      return pointed_cone_atoms(units, mesh);
    }
    // fan triangulation with per-triangle exact areas
    for (std::size_t k = 1; k + 1 < ring.size(); ++k) {
      const Vec &a = ring[0], &b = ring[k], &c = ring[k + 1];
      double area = spherical_triangle_area(a, b, c);
      if (area < 1e-15) continue;
      auto r = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(std::sqrt(area) / mesh)));
      std::vector<Vec> tri_pts;
      for (std::size_t p = 0; p < r; ++p)
        for (std::size_t q = 0; p + q < r; ++q) {
          double wa = (static_cast<double>(p) + 1.0 / 3.0) / static_cast<double>(r);
          double wb = (static_cast<double>(q) + 1.0 / 3.0) / static_cast<double>(r);
          double wc = 1.0 - wa - wb;
          tri_pts.push_back(normalized(wa * a + wb * b + wc * c));
          if (p + q + 2 <= r) {
            double va = (static_cast<double>(p) + 2.0 / 3.0) / static_cast<double>(r);
            double vb = (static_cast<double>(q) + 2.0 / 3.0) / static_cast<double>(r);
            tri_pts.push_back(normalized(va * a + vb * b + (1.0 - va - vb) * c));
          }
        }
      double w = area / static_cast<double>(tri_pts.size());
      for (auto& u : tri_pts)
        out.add(from_coords(span, u, zero_vec(span[0].size())), w);
    }
    return out;
  }
  // j == 4 (vertex cones in R^4): quasi-Monte-Carlo with facet-membership
  // tests; the caller rescales the i = 0 layer so the total is exact.
  {
    // facets of the cone: hyperplanes through 3-subsets of generators
    std::vector<Vec> normals;
    const std::size_t mm = ys.size();
    for (std::size_t a = 0; a < mm; ++a)
      for (std::size_t b = a + 1; b < mm; ++b)
        for (std::size_t c = a + 2; c < mm; ++c) {
          if (c <= b) continue;
          auto base = orthonormal_basis({ys[a], ys[b], ys[c]});
          if (base.size() != 3) continue;
          Vec w = zero_vec(4);
          for (std::size_t axis = 0; axis < 4; ++axis) {
            w = basis_vec(4, axis);
            for (const auto& bb : base) w -= dot(w, bb) * bb;
            if (norm(w) > 1e-8) break;
          }
          double nw = norm(w);
          if (nw < 1e-8) continue;
          w = w / nw;
          bool pos = false, neg = false;
          for (const auto& y : ys) {
            double v = dot(w, y);
            if (v > 1e-9) pos = true;
            if (v < -1e-9) neg = true;
          }
          if (pos && neg) continue;
          if (pos) w = -1.0 * w;
          normals.push_back(w); // cone side: w . y <= 0
        }
    auto net = sphere_net(4, 1 << 16);
    DimensionConstants dc(4);
    std::vector<Vec> inside;
    for (const auto& u : net) {
      Vec y = to_coords(span, u);
      bool ok = true;
      for (const auto& w : normals) ok = ok && dot(w, y) <= 1e-9;
      if (ok) inside.push_back(u);
    }
    double w = dc.omega[4] / static_cast<double>(net.size());
    for (const auto& u : inside) out.add(u, w);
    return out;
  }
}

} // namespace detail

/// Exact-total discretization of Lambda_i(P, .) for a V-polytope: per i-face,
/// (uniform grid on the face) x (discretized normal-cone sphere patch), with
/// weights H^i(F) * H^{n-i-1}(N(P,F) cap S^{n-1}) / omega_{n-i} split evenly.
/// Lower-dimensional polytopes are handled via the hull/perp split of the
/// normal cones. Exact for n <= 3 everywhere and for faces of dim >= 1 in
/// n = 4; vertex cones in R^4 are quasi-Monte-Carlo with the i = 0 total
/// renormalized to V_0 = 1.
inline DiscreteMeasure polytope_support_measure_exact(const ConvexBody& P,
                                                      std::size_t i,
                                                      double mesh = 0.1) {
  if (P.kind() != BodyKind::VPolytope || P.outer_radius() != 0.0)
    fail(ErrorKind::InvalidInput, "polytope oracle: needs a pure VPolytope");
  const std::size_t n = P.dim();
  if (i >= n) fail(ErrorKind::InvalidInput, "polytope oracle: i out of range");
  if (mesh <= 0.0) fail(ErrorKind::InvalidInput, "polytope oracle: mesh <= 0");

  detail::FaceLattice L = detail::build_face_lattice(P.vertices());
  const std::size_t d = L.hull_basis.size();
  const std::size_t q = n - d;
  DimensionConstants dc(n);
  DiscreteMeasure out(SpaceTag::SigmaN, 2 * n);

  // join factor: measure of (pointed A) (+) (full S^{q-1}) given |A|, |S^{q-1}|
  auto beta_factor = [](std::size_t j, std::size_t qq) {
    return std::tgamma(static_cast<double>(j) / 2.0) *
           std::tgamma(static_cast<double>(qq) / 2.0) /
           (2.0 * std::tgamma(static_cast<double>(j + qq) / 2.0));
  };

  bool rescale_qmc = false;
  for (const auto& F : L.faces) {
    if (F.dim != i) continue;
    const std::size_t k = F.dim;
    const bool top = F.verts.size() == L.verts.size();
    if (top && d == n) continue; // full-dim top face has trivial normal cone

    // --- face grid (hull coordinates), weights summing to H^k(F)
    std::vector<Vec> face_pts; // hull coords
    std::vector<double> face_w;
    if (k == 0) {
      face_pts.push_back(L.verts[F.verts[0]]);
      face_w.push_back(1.0);
    } else if (k == 1) {
      const Vec& a = L.verts[F.verts.front()];
      // find the two extreme vertices of the edge
      std::size_t lo = F.verts[0], hi = F.verts[0];
      Vec dir = zero_vec(d);
      for (auto vi : F.verts) {
        Vec dd = L.verts[vi] - a;
        if (norm(dd) > norm(dir)) { dir = dd; hi = vi; }
      }
      for (auto vi : F.verts)
        if (dot(L.verts[vi] - a, dir) < dot(L.verts[lo] - a, dir)) lo = vi;
      const Vec &pA = L.verts[lo], &pB = L.verts[hi];
      double len = distance(pA, pB);
      auto cnt = std::max<std::size_t>(1, static_cast<std::size_t>(
                                              std::ceil(len / mesh)));
      for (std::size_t t = 0; t < cnt; ++t) {
        double s = (static_cast<double>(t) + 0.5) / static_cast<double>(cnt);
        face_pts.push_back(pA + s * (pB - pA));
        face_w.push_back(len / static_cast<double>(cnt));
      }
    } else if (k == 2) {
      // ordered polygon in its own plane
      std::vector<Vec> ring;
      {
        Vec cen = zero_vec(d);
        for (auto vi : F.verts) cen += L.verts[vi];
        cen = cen / static_cast<double>(F.verts.size());
        std::vector<Vec> diffs;
        for (auto vi : F.verts) diffs.push_back(L.verts[vi] - cen);
        auto plane = detail::orthonormal_basis(diffs);
        if (plane.size() != 2)
          fail(ErrorKind::InvalidInput, "polytope oracle: bad 2-face");
        std::vector<std::pair<double, std::size_t>> byang;
        for (auto vi : F.verts) {
          Vec rel = L.verts[vi] - cen;
          byang.push_back({std::atan2(dot(rel, plane[1]), dot(rel, plane[0])), vi});
        }
        std::sort(byang.begin(), byang.end());
        for (auto& pr : byang) ring.push_back(L.verts[pr.second]);
      }
      for (std::size_t t = 1; t + 1 < ring.size(); ++t) {
        const Vec &a = ring[0], &b = ring[t], &c = ring[t + 1];
        Vec ab = b - a, ac = c - a;
        double g11 = dot(ab, ab), g12 = dot(ab, ac), g22 = dot(ac, ac);
        double area = 0.5 * std::sqrt(std::max(g11 * g22 - g12 * g12, 0.0));
        if (area < 1e-15) continue;
        auto r = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(std::sqrt(area) / mesh)));
        std::size_t added = 0;
        std::vector<Vec> tri;
        for (std::size_t pu = 0; pu < r; ++pu)
          for (std::size_t qv = 0; pu + qv < r; ++qv) {
            double wa = (static_cast<double>(pu) + 1.0 / 3.0) / static_cast<double>(r);
            double wb = (static_cast<double>(qv) + 1.0 / 3.0) / static_cast<double>(r);
            tri.push_back(a + wa * ab + wb * ac);
            ++added;
            if (pu + qv + 2 <= r) {
              double va = (static_cast<double>(pu) + 2.0 / 3.0) / static_cast<double>(r);
              double vb = (static_cast<double>(qv) + 2.0 / 3.0) / static_cast<double>(r);
              tri.push_back(a + va * ab + vb * ac);
              ++added;
            }
          }
        for (auto& pt : tri) {
          face_pts.push_back(pt);
          face_w.push_back(area / static_cast<double>(added));
        }
      }
    } else { // k == 3
      // volume by fan over 2-subfaces; points by Halton rejection
      Vec cen = zero_vec(d);
      for (auto vi : F.verts) cen += L.verts[vi];
      cen = cen / static_cast<double>(F.verts.size());
      std::vector<Vec> diffs;
      for (auto vi : F.verts) diffs.push_back(L.verts[vi] - cen);
      auto cell = detail::orthonormal_basis(diffs);
      if (cell.size() != 3)
        fail(ErrorKind::InvalidInput, "polytope oracle: bad 3-face");
      // 2-subfaces = faces of the lattice whose vertex set is a subset
      std::vector<std::pair<Vec, double>> planes; // (unit normal, offset) in cell coords
      double volume = 0.0;
      for (const auto& G : L.faces) {
        if (G.dim != 2 || G.verts.size() >= F.verts.size()) continue;
        if (!std::includes(F.verts.begin(), F.verts.end(), G.verts.begin(),
                           G.verts.end()))
          continue;
        Vec gcen = zero_vec(d);
        for (auto vi : G.verts) gcen += L.verts[vi];
        gcen = gcen / static_cast<double>(G.verts.size());
        std::vector<Vec> gd;
        for (auto vi : G.verts)
          gd.push_back(detail::to_coords(cell, L.verts[vi] - cen) -
                       detail::to_coords(cell, gcen - cen));
        auto plane = detail::orthonormal_basis(gd);
        if (plane.size() != 2) continue;
        Vec gc3 = detail::to_coords(cell, gcen - cen);
        Vec nu = gc3;
        for (const auto& b : plane) nu -= dot(nu, b) * b;
        double nn = norm(nu);
        if (nn < 1e-10) continue;
        nu = nu / nn;
        double off = dot(nu, gc3);
        if (off < 0) { nu = -1.0 * nu; off = -off; }
        planes.push_back({nu, off});
        // polygon area of G (same shoelace as above, in 3D cell coords)
        std::vector<std::pair<double, Vec>> byang;
        for (auto vi : G.verts) {
          Vec rel = detail::to_coords(cell, L.verts[vi] - cen) - gc3;
          byang.push_back({std::atan2(dot(rel, plane[1]), dot(rel, plane[0])), rel});
        }
        std::sort(byang.begin(), byang.end(),
                  [](const auto& x, const auto& y) { return x.first < y.first; });
        double area = 0.0;
        for (std::size_t t = 1; t + 1 < byang.size(); ++t) {
          Vec ab = byang[t].second - byang[0].second;
          Vec ac = byang[t + 1].second - byang[0].second;
          double g11 = dot(ab, ab), g12 = dot(ab, ac), g22 = dot(ac, ac);
          area += 0.5 * std::sqrt(std::max(g11 * g22 - g12 * g12, 0.0));
        }
        volume += area * off / 3.0;
      }
      // bounding box in cell coords
      Vec blo(3), bhi(3);
      bool first = true;
      for (auto vi : F.verts) {
        Vec y = detail::to_coords(cell, L.verts[vi] - cen);
        for (std::size_t ax = 0; ax < 3; ++ax) {
          if (first || y[ax] < blo[ax]) blo[ax] = y[ax];
          if (first || y[ax] > bhi[ax]) bhi[ax] = y[ax];
        }
        first = false;
      }
      auto target = std::max<std::size_t>(
          8, static_cast<std::size_t>(std::ceil(volume / (mesh * mesh * mesh))));
      std::size_t got = 0, tries = 0;
      while (got < target && tries < target * 1000) {
        Vec y(3);
        for (std::size_t ax = 0; ax < 3; ++ax)
          y[ax] = blo[ax] + (bhi[ax] - blo[ax]) *
                                detail::radical_inverse(tries + 1, ax == 0 ? 2 : ax == 1 ? 3 : 5);
        ++tries;
        bool ok = true;
        for (const auto& pl : planes) ok = ok && dot(pl.first, y) <= pl.second + 1e-12;
        if (!ok) continue;
        Vec p = cen;
        for (std::size_t ax = 0; ax < 3; ++ax) p += y[ax] * cell[ax];
        face_pts.push_back(p);
        ++got;
      }
      if (got == 0)
        fail(ErrorKind::InvalidInput, "polytope oracle: empty 3-face sample");
      face_w.assign(got, volume / static_cast<double>(got));
    }

    // --- normal cone atoms
    std::vector<Vec> gens; // hull coords
    for (std::size_t fi = 0; fi < L.facet_ids.size(); ++fi) {
      const auto& facet = L.faces[L.facet_ids[fi]];
      if (std::includes(facet.verts.begin(), facet.verts.end(), F.verts.begin(),
                        F.verts.end()))
        gens.push_back(L.facet_normals[fi]);
    }
    detail::SphereAtoms cone;
    const std::size_t j = top ? 0 : d - k;
    if (j > 0) {
      cone = detail::pointed_cone_atoms(gens, mesh);
      if (j == 4) rescale_qmc = true;
    }

    // --- combine with the perp sphere (join) and emit atoms
    const double inv_omega = 1.0 / dc.omega[n - i];
    auto emit = [&](const Vec& x_amb, const Vec& u_amb, double w) {
      SupportPoint a{x_amb, u_amb};
      out.add_atom(a, w * inv_omega);
    };
    for (std::size_t fp = 0; fp < face_pts.size(); ++fp) {
      Vec x = detail::from_coords(L.hull_basis, face_pts[fp], L.origin);
      if (q == 0) {
        for (std::size_t ca = 0; ca < cone.dirs.size(); ++ca) {
          Vec u = detail::from_coords(L.hull_basis, cone.dirs[ca], zero_vec(n));
          emit(x, normalized(u), face_w[fp] * cone.weights[ca]);
        }
      } else if (j == 0) {
        auto net = sphere_net(q, std::max<std::size_t>(
                                     2, static_cast<std::size_t>(std::ceil(
                                            dc.omega[q] / std::pow(mesh, std::max<std::size_t>(q, 1) - 1)))));
        double w = dc.omega[q] / static_cast<double>(net.size());
        for (const auto& b : net) {
          Vec u = zero_vec(n);
          for (std::size_t ax = 0; ax < q; ++ax) u += b[ax] * L.perp_basis[ax];
          emit(x, normalized(u), face_w[fp] * w);
        }
      } else {
        // join: u = cos t * a + sin t * b, total = |A| * omega_q * beta(j, q)
        auto net = sphere_net(q, std::max<std::size_t>(
                                     2, static_cast<std::size_t>(std::ceil(
                                            dc.omega[q] / std::pow(mesh, std::max<std::size_t>(q, 1) - 1)))));
        double wb = dc.omega[q] / static_cast<double>(net.size());
        const std::size_t nt = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(0.5 * std::numbers::pi / mesh)));
        std::vector<double> tw(nt), tv(nt);
        double tsum = 0.0;
        for (std::size_t tt = 0; tt < nt; ++tt) {
          double t = 0.5 * std::numbers::pi * (static_cast<double>(tt) + 0.5) /
                     static_cast<double>(nt);
          tv[tt] = t;
          tw[tt] = std::pow(std::cos(t), static_cast<double>(j - 1)) *
                   std::pow(std::sin(t), static_cast<double>(q - 1));
          tsum += tw[tt];
        }
        double bf = beta_factor(j, q);
        for (auto& w : tw) w *= bf / tsum; // sum over t equals beta(j,q)
        for (std::size_t ca = 0; ca < cone.dirs.size(); ++ca) {
          Vec ua = detail::from_coords(L.hull_basis, cone.dirs[ca], zero_vec(n));
          for (std::size_t bb = 0; bb < net.size(); ++bb) {
            Vec ub = zero_vec(n);
            for (std::size_t ax = 0; ax < q; ++ax) ub += net[bb][ax] * L.perp_basis[ax];
            for (std::size_t tt = 0; tt < nt; ++tt) {
              Vec u = std::cos(tv[tt]) * ua + std::sin(tv[tt]) * ub;
              emit(x, normalized(u),
                   face_w[fp] * cone.weights[ca] * wb * tw[tt]);
            }
          }
        }
      }
    }
  }

  if (rescale_qmc && i == 0) {
    double tm = out.total_mass();
    if (tm > 0.0) out.scale_weights(1.0 / tm); // V_0 = 1 exactly
  }
  return out;
}

/// Exact ball oracle: Nor B = {(c + r u, u)}; atoms on a low-discrepancy net
/// with weights V_i(B)/|net|.
inline DiscreteMeasure ball_support_measure_exact(const ConvexBody& B, std::size_t i,
                                                  double mesh = 0.05) {
  if (B.kind() != BodyKind::Ball || B.outer_radius() != 0.0)
    fail(ErrorKind::InvalidInput, "ball oracle: needs a pure Ball");
  const std::size_t n = B.dim();
  if (i >= n) fail(ErrorKind::InvalidInput, "ball oracle: i out of range");
  DimensionConstants dc(n);
  auto count = std::max<std::size_t>(
      16, static_cast<std::size_t>(std::ceil(
              dc.omega[n] / std::pow(mesh, static_cast<double>(n - 1)))));
  auto net = sphere_net(n, count);
  const double vi = ball_intrinsic_volume(n, i, B.radius());
  DiscreteMeasure out(SpaceTag::SigmaN, 2 * n);
  out.reserve(net.size());
  for (const auto& u : net) {
    SupportPoint a{B.center() + B.radius() * u, u};
    out.add_atom(a, vi / static_cast<double>(net.size()));
  }
  return out;
}

} // namespace supmeas
