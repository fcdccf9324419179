#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "supmeas/error.hpp"
#include "supmeas/lp.hpp"
#include "supmeas/measure.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

using Metric = std::function<double(const Vec&, const Vec&)>;

inline double euclidean_metric(const Vec& a, const Vec& b) { return distance(a, b); }

/// Feasible dual certificate for d_bL: the optimal test function restricted
/// to the merged support.
struct LipschitzWitness {
  std::vector<Vec> support;
  std::vector<double> values;  // f(a) per support point
  std::vector<double> coeffs;  // signed weight difference c(a)
  double objective = 0.0;
};

struct DblOptions {
  std::size_t atom_cap = 4000;  // combined support after coarsening
  double grid = 0.0;            // coarsening cell size; 0 = no coarsening
  Metric metric;                // default: Euclidean
  double feas_tol = 1e-9;
  std::size_t max_rounds = 200;
};

struct DblResult {
  double value = 0.0;
  LipschitzWitness witness;
  double coarsening_error = 0.0; // sum |w| * (distance moved)
  double duality_gap = 0.0;
  std::size_t lp_iterations = 0;
  std::size_t support_size = 0;
};

namespace detail {

struct SignedSupport {
  std::vector<Vec> points;
  std::vector<double> coeffs; // mu weight - nu weight, merged
  double moved = 0.0;         // coarsening disclosure
};

/// Merge the signed difference mu - nu onto a common support. With grid > 0,
/// atoms are pooled per grid cell at the |w|-weighted centroid; common
/// random numbers then cancel shared atoms exactly cell by cell.
inline SignedSupport merge_difference(const DiscreteMeasure& mu,
                                      const DiscreteMeasure& nu, double grid) {
  if (mu.space_tag() != nu.space_tag() || mu.point_dim() != nu.point_dim())
    fail(ErrorKind::InvalidInput, "d_bL: measures live on different spaces");
  const std::size_t dim = mu.point_dim();
  SignedSupport out;

  if (grid <= 0.0) {
    // exact merge at coincident coordinates
    struct Entry { Vec p; double c; };
    std::vector<Entry> entries;
    auto feed = [&](const DiscreteMeasure& m, double sign) {
      for (std::size_t t = 0; t < m.size(); ++t)
        entries.push_back({m.location(t), sign * m.weight(t)});
    };
    feed(mu, 1.0);
    feed(nu, -1.0);
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
      for (std::size_t k = 0; k < dim; ++k)
        if (a.p[k] != b.p[k]) return a.p[k] < b.p[k];
      return false;
    });
    for (std::size_t t = 0; t < entries.size();) {
      std::size_t u = t;
      double c = 0.0;
      while (u < entries.size() && distance(entries[u].p, entries[t].p) <= 1e-12)
        c += entries[u++].c;
      if (std::abs(c) >= 1e-15) {
        out.points.push_back(entries[t].p);
        out.coeffs.push_back(c);
      }
      t = u;
    }
    return out;
  }

  struct Cell {
    double c = 0.0;  // signed net weight
    double aw = 0.0; // sum |w|
    Vec centroid;    // |w|-weighted accumulator, then the fixed representative
  };
  std::unordered_map<std::string, Cell> cells;
  auto key_of = [&](const Vec& p) {
    std::string key;
    key.reserve(dim * 8);
    for (std::size_t k = 0; k < dim; ++k) {
      auto q = static_cast<std::int64_t>(std::floor(p[k] / grid));
      key.append(reinterpret_cast<const char*>(&q), sizeof q);
    }
    return key;
  };
  // pass 1: net weights and centroids (atoms are never stored, so the merge
  // stays O(#cells) in memory)
  auto feed = [&](const DiscreteMeasure& m, double sign) {
    for (std::size_t t = 0; t < m.size(); ++t) {
      Vec p = m.location(t);
      double w = sign * m.weight(t);
      Cell& cell = cells[key_of(p)];
      if (cell.aw == 0.0) cell.centroid = zero_vec(dim);
      cell.c += w;
      cell.aw += std::abs(w);
      cell.centroid += std::abs(w) * p;
    }
  };
  feed(mu, 1.0);
  feed(nu, -1.0);
  for (auto& [key, cell] : cells)
    if (cell.aw > 0.0) cell.centroid = cell.centroid / cell.aw;
  // pass 2: disclosure term. Cells whose net weight cancels exactly
  // contribute nothing, and moving their (empty) net mass is free.
  auto disclose = [&](const DiscreteMeasure& m) {
    for (std::size_t t = 0; t < m.size(); ++t) {
      Vec p = m.location(t);
      const Cell& cell = cells.at(key_of(p));
      if (std::abs(cell.c) < 1e-15) continue;
      out.moved += std::abs(m.weight(t)) * distance(p, cell.centroid);
    }
  };
  disclose(mu);
  disclose(nu);
  for (auto& [key, cell] : cells) {
    if (cell.aw <= 0.0 || std::abs(cell.c) < 1e-15) continue;
    out.points.push_back(cell.centroid);
    out.coeffs.push_back(cell.c);
  }
  return out;
}

} // namespace detail

/// Exact d_bL on the (optionally coarsened) merged support:
///   maximize sum_a f(a) c(a)  s.t.  |f| <= 1,  |f(a)-f(b)| <= d(a,b).
/// Solved by row generation over the pairwise constraints with dual-based
/// dropping; the returned witness is re-checked against every pair.
inline DblResult bounded_lipschitz_distance(const DiscreteMeasure& mu,
                                            const DiscreteMeasure& nu,
                                            const DblOptions& opts = {}) {
  const Metric& dist = opts.metric ? opts.metric : euclidean_metric;
  detail::SignedSupport sup = detail::merge_difference(mu, nu, opts.grid);
  const std::size_t m = sup.points.size();
  if (m > opts.atom_cap)
    fail(ErrorKind::TooManyAtoms,
         "d_bL: support " + std::to_string(m) + " exceeds cap " +
             std::to_string(opts.atom_cap));

  DblResult res;
  res.coarsening_error = sup.moved;
  res.support_size = m;
  res.witness.support = sup.points;
  res.witness.coeffs = sup.coeffs;
  if (m == 0) {
    res.witness.objective = 0.0;
    return res;
  }

  // cached pairwise distances when affordable
  const bool cache = m <= 3000;
  std::vector<double> dcache;
  if (cache) {
    dcache.resize(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        dcache[a * m + b] = dcache[b * m + a] = dist(sup.points[a], sup.points[b]);
  }
  auto dd = [&](std::size_t a, std::size_t b) {
    return cache ? dcache[a * m + b] : dist(sup.points[a], sup.points[b]);
  };

  struct Row { std::size_t a, b; double d; }; // f(a) - f(b) <= d
  std::vector<Row> rows;
  std::vector<double> f(m, 0.0);
  for (std::size_t a = 0; a < m; ++a) f[a] = sup.coeffs[a] >= 0.0 ? 1.0 : -1.0;

  LPSolution sol;
  for (std::size_t round = 0;; ++round) {
    if (round >= opts.max_rounds)
      fail(ErrorKind::SolverStall, "d_bL: row generation did not converge");
    // collect most-violated constraints; a bounded min-heap keeps memory
    // O(m) even when nearly all pairs are violated
    struct Viol { double v; std::size_t a, b; };
    const std::size_t take_cap = std::min<std::size_t>(4 * m + 16, 1536);
    auto heap_less = [](const Viol& x, const Viol& y) { return x.v > y.v; };
    std::vector<Viol> viols;
    viols.reserve(take_cap + 1);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        double gap = std::abs(f[a] - f[b]) - dd(a, b);
        if (gap > opts.feas_tol) {
          Viol v = f[a] > f[b] ? Viol{gap, a, b} : Viol{gap, b, a};
          if (viols.size() < take_cap) {
            viols.push_back(v);
            std::push_heap(viols.begin(), viols.end(), heap_less);
          } else if (gap > viols.front().v) {
            std::pop_heap(viols.begin(), viols.end(), heap_less);
            viols.back() = v;
            std::push_heap(viols.begin(), viols.end(), heap_less);
          }
        }
      }
    if (viols.empty() && round > 0) break;
    if (viols.empty() && round == 0 && m > 0) {
      // box optimum already feasible (e.g. far-apart supports)
      break;
    }
    std::sort_heap(viols.begin(), viols.end(), heap_less); // ascending; order irrelevant
    for (const auto& v : viols) rows.push_back({v.a, v.b, dd(v.a, v.b)});

    LPProblem p;
    p.vars = m;
    p.c = sup.coeffs;
    p.lo.assign(m, -1.0);
    p.hi.assign(m, 1.0);
    std::vector<double> coeff(m, 0.0);
    for (const auto& r : rows) {
      coeff[r.a] = 1.0;
      coeff[r.b] = -1.0;
      p.add_row(coeff, r.d);
      coeff[r.a] = 0.0;
      coeff[r.b] = 0.0;
    }
    sol = lp_solve(p);
    if (sol.status != LPStatus::Optimal)
      fail(ErrorKind::SolverStall, "d_bL: LP not optimal");
    f = sol.x;
    res.lp_iterations += sol.iterations;
    res.duality_gap = std::abs(sol.duality_gap);

    // drop rows that are slack with zero dual (keeps the working set small)
    std::vector<Row> kept;
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      double slack = rows[ri].d - (f[rows[ri].a] - f[rows[ri].b]);
      if (slack < 1e-7 || sol.row_dual[ri] > 1e-12) kept.push_back(rows[ri]);
    }
    rows = std::move(kept);
  }

  double obj = 0.0;
  for (std::size_t a = 0; a < m; ++a) obj += f[a] * sup.coeffs[a];
  // d_bL is symmetric: flip the witness if the signed orientation came out
  // negative
  if (obj < 0.0) {
    for (auto& v : f) v = -v;
    obj = -obj;
  }

  // independent feasibility re-check of the witness (outside the solver)
  for (std::size_t a = 0; a < m; ++a) {
    if (std::abs(f[a]) > 1.0 + 1e-9)
      fail(ErrorKind::SolverStall, "d_bL: witness violates the box");
    for (std::size_t b = a + 1; b < m; ++b)
      if (std::abs(f[a] - f[b]) > dd(a, b) + 1e-9)
        fail(ErrorKind::SolverStall, "d_bL: witness violates a Lipschitz pair");
  }

  res.value = obj;
  res.witness.values = std::move(f);
  res.witness.objective = obj;
  return res;
}

/// Total variation distance of the signed difference, merging atoms at
/// distance <= 1e-12.
inline double total_variation_distance(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu) {
  detail::SignedSupport sup = detail::merge_difference(mu, nu, 0.0);
  double s = 0.0;
  for (double c : sup.coeffs) s += std::abs(c);
  return s;
}

} // namespace supmeas
