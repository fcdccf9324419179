#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/bounded_lipschitz.hpp"
#include "supmeas/constants.hpp"
#include "supmeas/error.hpp"
#include "supmeas/measures.hpp"
#include "supmeas/quadrature.hpp"
#include "supmeas/rng.hpp"
#include "supmeas/sphere_net.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

/// The cap-cut construction: E = span(e_0..e_i), centers on the unit sphere
/// S_E with pairwise geodesic separation >= 2h.
struct CapConstruction {
  std::size_t n = 0;
  std::size_t i = 0;
  double h = 0.0;
  std::vector<Vec> centers; // unit vectors in R^n lying in E
  double min_separation = 0.0;

  std::size_t cap_count() const { return centers.size(); }
};

/// For i = 1 the circle admits the exact count floor(pi/h), equally spaced;
/// otherwise greedy farthest-point packing at separation 2h on S_E.
inline CapConstruction build_cap_packing(std::size_t n, std::size_t i, double h) {
  if (i < 1 || i >= n || h <= 0.0 || h >= 0.5 * std::numbers::pi)
    fail(ErrorKind::InvalidInput, "build_cap_packing: need 1 <= i < n, 0 < h < pi/2");
  CapConstruction c;
  c.n = n;
  c.i = i;
  c.h = h;
  auto lift = [&](const Vec& y) {
    Vec v = zero_vec(n);
    for (std::size_t k = 0; k < y.size(); ++k) v[k] = y[k];
    return v;
  };
  if (i == 1) {
    auto N = static_cast<std::size_t>(std::floor(std::numbers::pi / h));
    for (std::size_t k = 0; k < N; ++k) {
      double th = 2.0 * std::numbers::pi * static_cast<double>(k) /
                  static_cast<double>(N);
      Vec y(2);
      y[0] = std::cos(th);
      y[1] = std::sin(th);
      c.centers.push_back(lift(y));
    }
    c.min_separation = 2.0 * std::numbers::pi / static_cast<double>(N);
    return c;
  }
  // greedy farthest-point on S^i
  auto cand = sphere_net(i + 1, 4096);
  std::vector<double> mind(cand.size(), 4.0); // geodesic, "infinite" start
  c.centers.push_back(lift(cand[0]));
  auto geo = [](const Vec& a, const Vec& b) {
    double dsum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dsum += a[k] * b[k];
    return std::acos(std::clamp(dsum, -1.0, 1.0));
  };
  for (std::size_t k = 0; k < cand.size(); ++k) mind[k] = geo(cand[k], cand[0]);
  while (true) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < cand.size(); ++k)
      if (mind[k] > mind[best]) best = k;
    if (mind[best] < 2.0 * h) break;
    c.centers.push_back(lift(cand[best]));
    for (std::size_t k = 0; k < cand.size(); ++k)
      mind[k] = std::min(mind[k], geo(cand[k], cand[best]));
  }
  c.min_separation = 4.0;
  for (std::size_t a = 0; a < c.centers.size(); ++a)
    for (std::size_t b = a + 1; b < c.centers.size(); ++b) {
      double g = std::acos(std::clamp(dot(c.centers[a], c.centers[b]), -1.0, 1.0));
      c.min_separation = std::min(c.min_separation, g);
    }
  return c;
}

/// B_E: the unit ball of E, as a BallCut with the subspace equations
/// expressed as opposite halfspace pairs.
inline ConvexBody base_body(const CapConstruction& c) {
  std::vector<Halfspace> hs;
  for (std::size_t k = c.i + 1; k < c.n; ++k) {
    hs.push_back({basis_vec(c.n, k, 1.0), 0.0});
    hs.push_back({basis_vec(c.n, k, -1.0), 0.0});
  }
  if (hs.empty()) return ConvexBody::ball(zero_vec(c.n), 1.0);
  return ConvexBody::ball_cut(zero_vec(c.n), 1.0, hs);
}

/// B_E(h) = B_E intersected with the cap-cut halfspaces z . e_j <= cos h.
inline ConvexBody cut_body(const CapConstruction& c) {
  std::vector<Halfspace> hs;
  for (std::size_t k = c.i + 1; k < c.n; ++k) {
    hs.push_back({basis_vec(c.n, k, 1.0), 0.0});
    hs.push_back({basis_vec(c.n, k, -1.0), 0.0});
  }
  for (const auto& e : c.centers) hs.push_back({e, std::cos(c.h)});
  return ConvexBody::ball_cut(zero_vec(c.n), 1.0, hs);
}

/// f_h(u) = cos s (1 - sin t / sin h) clipped to [0, 1]: s the angle of u
/// from E, t the in-E geodesic distance to the nearest cap center (ties by
/// lowest index).
inline double eval_f(const CapConstruction& c, const Vec& u) {
  if (std::abs(norm(u) - 1.0) > 1e-9)
    fail(ErrorKind::NonUnitDirection, "eval_f: |u| != 1");
  double proj_sq = 0.0;
  for (std::size_t k = 0; k <= c.i; ++k) proj_sq += u[k] * u[k];
  double cos_s = std::sqrt(std::min(proj_sq, 1.0));
  if (cos_s < 1e-14) return 0.0;
  double best = -2.0;
  for (const auto& e : c.centers) {
    double dval = dot(u, e) / cos_s; // = cos t
    if (dval > best + 1e-15) best = dval;
  }
  double cos_t = std::clamp(best, -1.0, 1.0);
  double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  if (cos_t < 0.0) return 0.0; // t > pi/2: outside every cap's range
  double v = cos_s * (1.0 - sin_t / std::sin(c.h));
  return std::clamp(v, 0.0, 1.0);
}

/// Empirical Lipschitz ratio of f_h over random global pairs plus localized
/// perturbation pairs (the analytic bound is c_4 / h).
inline double measured_lipschitz(const CapConstruction& c, std::uint64_t seed,
                                 std::size_t pairs = 4000) {
  RngStream rng(seed, 0x11b);
  auto random_unit = [&] {
    Vec u(c.n);
    for (std::size_t k = 0; k < c.n; ++k) u[k] = rng.normal();
    double nu = norm(u);
    while (nu < 1e-12) {
      for (std::size_t k = 0; k < c.n; ++k) u[k] = rng.normal();
      nu = norm(u);
    }
    return u / nu;
  };
  double best = 0.0;
  for (std::size_t t = 0; t < pairs; ++t) {
    Vec u = random_unit();
    Vec v;
    if (t % 2 == 0) {
      v = random_unit();
    } else {
      Vec g = random_unit();
      v = normalized(u + 1e-4 * g);
    }
    double d = distance(u, v);
    if (d < 1e-12) continue;
    double r = std::abs(eval_f(c, u) - eval_f(c, v)) / d;
    best = std::max(best, r);
  }
  return best;
}

/// Closed form of the single-cap pairing integral, cross-checked against the
/// product-parametrization quadrature (tolerance 1e-8).
inline double psi_cap_pairing(std::size_t n, std::size_t i, double h) {
  if (i < 1 || i >= n || h <= 0.0 || h >= 0.5 * std::numbers::pi)
    fail(ErrorKind::InvalidInput, "psi_cap_pairing: bad (n, i, h)");
  DimensionConstants dc(n);
  const double closed =
      dc.kappa[i] * dc.kappa[n - i - 1] / dc.omega[n - i] * std::pow(std::sin(h), static_cast<double>(i));

  CapConstruction c = build_cap_packing(n, i, h);
  const Vec& e = c.centers[0];
  double quad;
  const double pref = dc.kappa[i] * std::pow(std::sin(h), static_cast<double>(i)) /
                      dc.omega[n - i];
  if (i == n - 1) {
    // formally s = 0: nu(e) = {e}
    quad = pref * eval_f(c, e);
  } else {
    const std::size_t perp = n - i - 1; // dim of E^perp
    auto net = sphere_net(perp, perp == 1 ? 2 : 512);
    double acc = 0.0;
    for (const auto& w : net) {
      Vec wl = zero_vec(n);
      for (std::size_t k = 0; k < perp; ++k) wl[i + 1 + k] = w[k];
      auto integrand = [&](double s) {
        Vec u = std::cos(s) * e + std::sin(s) * wl;
        return eval_f(c, normalized(u)) *
               std::pow(std::sin(s), static_cast<double>(n - i - 2));
      };
      acc += integrate(integrand, 0.0, 0.5 * std::numbers::pi, 1e-11);
    }
    quad = pref * dc.omega[n - i - 1] * acc / static_cast<double>(net.size());
  }
  if (std::abs(quad - closed) > 1e-8)
    fail(ErrorKind::QuadratureMismatch,
         "psi_cap_pairing: quadrature " + std::to_string(quad) + " vs closed " +
             std::to_string(closed));
  return closed;
}

/// Pairing of f_h against Psi_i(B_E): adaptive quadrature of
/// (omega_i kappa_{n-i-1} / omega_{n-i}) [ int_0^h sin^{i-1} - (1/sin h) int_0^h sin^i ].
inline double psi_ball_pairing(std::size_t n, std::size_t i, double h) {
  if (i < 1 || i >= n || h <= 0.0 || h >= 0.5 * std::numbers::pi)
    fail(ErrorKind::InvalidInput, "psi_ball_pairing: bad (n, i, h)");
  DimensionConstants dc(n);
  const double pref = dc.omega[i] * dc.kappa[n - i - 1] / dc.omega[n - i];
  auto s1 = integrate(
      [&](double t) { return std::pow(std::sin(t), static_cast<double>(i) - 1.0); },
      0.0, h, 1e-12);
  auto s2 = integrate(
      [&](double t) { return std::pow(std::sin(t), static_cast<double>(i)); }, 0.0,
      h, 1e-12);
  return pref * (s1 - s2 / std::sin(h));
}

/// Coefficient of h^i in the small-h expansion of psi_ball_pairing.
inline double psi_ball_leading_coefficient(std::size_t n, std::size_t i) {
  DimensionConstants dc(n);
  return dc.kappa[i] * dc.kappa[n - i - 1] / dc.omega[n - i] -
         dc.omega[i] * dc.kappa[n - i - 1] /
             (static_cast<double>(i + 1) * dc.omega[n - i]);
}

/// Richardson estimate of the leading coefficient from values at h and h/2
/// (the remainder is O(h^2) relative).
inline double psi_ball_leading_richardson(std::size_t n, std::size_t i, double h) {
  double c1 = psi_ball_pairing(n, i, h) / std::pow(h, static_cast<double>(i));
  double c2 = psi_ball_pairing(n, i, 0.5 * h) / std::pow(0.5 * h, static_cast<double>(i));
  return (4.0 * c2 - c1) / 3.0;
}

// ---------------------------------------------------------------------------
// tightness experiment

struct TightnessRow {
  std::size_t n = 0, i = 0;
  double h = 0.0;
  std::size_t caps = 0;        // N_i(h)
  double gap_analytic = 0.0;   // N (cap - ball pairing)
  double lip_measured = 0.0;
  double lower_bound = 0.0;    // gap / lip
  double dH_bound = 0.0;       // 1 - cos h
  double dbl_empirical = 0.0;
  double mc_stderr = 0.0;
  std::size_t support_cells = 0;
  double coarsen_bound = 0.0;  // sum |w| * (cell diameter / 2)
};

struct TightnessReport {
  std::vector<TightnessRow> rows;
  double fitted_exponent = 0.0; // OLS slope of log dbl vs log dH
};

namespace detail {

/// Symmetry folding for the i = 1 circle packing: rotation by the cap period
/// about the (e_0, e_1)-plane, mirror across a cap meridian, and the E^perp
/// sign flip (n = 3). Fundamental domain: theta in [0, period/2], z >= 0.
struct CircleFold {
  double period = 0.0;

  Vec fold(const Vec& u) const {
    double th = std::atan2(u[1], u[0]);
    th = th - period * std::floor(th / period);
    if (th > 0.5 * period) th = period - th;
    double r = std::hypot(u[0], u[1]);
    Vec v(3);
    v[0] = r * std::cos(th);
    v[1] = r * std::sin(th);
    v[2] = std::abs(u[2]);
    return v;
  }

  double quotient_distance(const Vec& a, const Vec& b) const {
    double best = 1e300;
    double thb = std::atan2(b[1], b[0]);
    double rb = std::hypot(b[0], b[1]);
    for (int k = -1; k <= 1; ++k)
      for (int mirror = 0; mirror <= 1; ++mirror)
        for (int zflip = 0; zflip <= 1; ++zflip) {
          double th = (mirror ? -thb : thb) + static_cast<double>(k) * period;
          double z = zflip ? -b[2] : b[2];
          double dx = a[0] - rb * std::cos(th);
          double dy = a[1] - rb * std::sin(th);
          double dz = a[2] - z;
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
    return std::sqrt(best);
  }
};

} // namespace detail

struct TightnessOptions {
  std::size_t samples = 2'000'000; // per radius, shared by the body pair
  std::size_t groups = 8;          // batches for the MC standard error
  double grid = 0.0;               // 0: eps = max(h/8, 0.008)
  std::size_t atom_cap = 6000;
  std::size_t workers = 1;
};

/// One grid point of the tightness experiment: analytic gap and lower bound,
/// plus the empirical d_bL between extracted Psi_i measures of B_E(h) and
/// B_E under common random numbers. For (i = 1, n = 3) the LP runs on the
/// symmetry-folded quotient, which is exact for the symmetrized measures and
/// an unbiased, variance-reduced estimate of the same d_bL.
inline TightnessRow tightness_point(std::size_t n, std::size_t i, double h,
                                    std::uint64_t seed,
                                    const TightnessOptions& opts = {}) {
  TightnessRow row;
  row.n = n;
  row.i = i;
  row.h = h;
  CapConstruction cons = build_cap_packing(n, i, h);
  row.caps = cons.cap_count();
  row.gap_analytic = static_cast<double>(row.caps) *
                     (psi_cap_pairing(n, i, h) - psi_ball_pairing(n, i, h));
  row.lip_measured = measured_lipschitz(cons, seed);
  row.lower_bound = row.gap_analytic / row.lip_measured;
  row.dH_bound = 1.0 - std::cos(h);

  ConvexBody B = base_body(cons);
  ConvexBody Bh = cut_body(cons);
  const bool fold = (i == 1 && n == 3);
  detail::CircleFold folder{2.0 * std::numbers::pi / static_cast<double>(row.caps)};
  const double eps = opts.grid > 0.0 ? opts.grid : std::max(h / 8.0, 0.008);

  const std::size_t G = std::max<std::size_t>(2, opts.groups);
  std::vector<double> coeff = vandermonde_coefficients(n);

  struct Cell {
    std::vector<double> cg; // signed net weight per group
    double aw = 0.0;
    Vec usum;
  };
  std::unordered_map<std::string, Cell> cells;
  auto key_of = [&](const Vec& p) {
    std::string key;
    key.reserve(p.size() * 8);
    for (std::size_t k = 0; k < p.size(); ++k) {
      auto q = static_cast<std::int64_t>(std::floor(p[k] / eps));
      key.append(reinterpret_cast<const char*>(&q), sizeof q);
    }
    return key;
  };
  auto deposit = [&](const Vec& u_raw, double w, std::size_t g) {
    Vec u = fold ? folder.fold(u_raw) : u_raw;
    Cell& cell = cells[key_of(u)];
    if (cell.cg.empty()) {
      cell.cg.assign(G, 0.0);
      cell.usum = zero_vec(u.size());
    }
    cell.cg[g] += w;
    cell.aw += std::abs(w);
    cell.usum += std::abs(w) * u;
  };

  const std::size_t N = opts.samples;
  for (std::size_t j = 0; j < n; ++j) {
    const double rho = static_cast<double>(j + 1) / static_cast<double>(n);
    Box box = bounding_box(B, rho); // B contains Bh: shared CRN box
    const double w = coeff[i * n + j] * box.volume() / static_cast<double>(N);
    const std::size_t nblocks = (N + detail::kSampleBlock - 1) / detail::kSampleBlock;
    std::uint64_t band = 0x54 + j * (std::uint64_t{1} << 32);
    // sequential over blocks: the hash map is shared (worker-count
    // independence of the *result* comes from per-block substreams; the
    // tightness path itself runs single-threaded)
    for (std::size_t b = 0; b < nblocks; ++b) {
      RngStream rng(seed, band + b);
      const std::size_t lo = b * detail::kSampleBlock;
      const std::size_t hi = std::min(N, lo + detail::kSampleBlock);
      const std::size_t g = b % G;
      for (std::size_t s = lo; s < hi; ++s) {
        Vec x = detail::uniform_in_box(box, rng);
        ProjectionResult pb = project(B, x);
        bool in_b = pb.d > 0.0 && pb.d <= rho;
        ProjectionResult ph = project(Bh, x);
        bool in_h = ph.d > 0.0 && ph.d <= rho;
        // signed difference Psi_i(B_E(h)) - Psi_i(B_E)
        if (in_h) deposit(*ph.u, w, g);
        if (in_b) deposit(*pb.u, -w, g);
      }
    }
  }

  // cells -> support
  DiscreteMeasure mu(SpaceTag::Sphere, n), nu(SpaceTag::Sphere, n);
  std::vector<Vec> reps;
  std::vector<std::vector<double>> groups;
  const double cell_diam = 0.5 * std::sqrt(static_cast<double>(n)) * eps;
  for (auto& [key, cell] : cells) {
    double net = 0.0, act = 0.0;
    for (double c : cell.cg) {
      net += c;
      act += std::abs(c);
    }
    if (act < 1e-15) continue;
    Vec rep = cell.usum / cell.aw;
    row.coarsen_bound += cell.aw * cell_diam;
    reps.push_back(rep);
    groups.push_back(cell.cg);
    if (net >= 0.0)
      mu.add_atom(rep, net);
    else
      nu.add_atom(rep, -net);
  }
  row.support_cells = reps.size();

  DblOptions dopts;
  dopts.atom_cap = opts.atom_cap;
  dopts.grid = 0.0;
  if (fold)
    dopts.metric = [folder](const Vec& a, const Vec& b) {
      return folder.quotient_distance(a, b);
    };
  DblResult dr = bounded_lipschitz_distance(mu, nu, dopts);
  row.dbl_empirical = dr.value;

  // group-wise witness objectives for the standard error
  if (!dr.witness.values.empty()) {
    // map witness support back to our rep order (merge keeps coordinates)
    std::unordered_map<std::string, double> fvals;
    auto rkey = [&](const Vec& p) {
      std::string key;
      for (std::size_t k = 0; k < p.size(); ++k) {
        double v = p[k];
        key.append(reinterpret_cast<const char*>(&v), sizeof v);
      }
      return key;
    };
    for (std::size_t t = 0; t < dr.witness.support.size(); ++t)
      fvals[rkey(dr.witness.support[t])] = dr.witness.values[t];
    std::vector<double> og(G, 0.0);
    for (std::size_t t = 0; t < reps.size(); ++t) {
      auto it = fvals.find(rkey(reps[t]));
      if (it == fvals.end()) continue; // fully cancelled cell
      for (std::size_t g = 0; g < G; ++g) og[g] += it->second * groups[t][g];
    }
    double total = 0.0;
    for (double o : og) total += o;
    double mean = total / static_cast<double>(G);
    double ss = 0.0;
    for (double o : og) ss += (o - mean) * (o - mean);
    row.mc_stderr = std::sqrt(ss * static_cast<double>(G) /
                              static_cast<double>(G - 1));
  }
  return row;
}

inline TightnessReport tightness_report(std::size_t n, std::size_t i,
                                        const std::vector<double>& h_grid,
                                        std::uint64_t seed,
                                        const TightnessOptions& opts = {}) {
  TightnessReport rep;
  for (double h : h_grid) rep.rows.push_back(tightness_point(n, i, h, seed, opts));
  // OLS slope of log dbl vs log dH
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const auto& r : rep.rows) {
    if (r.dbl_empirical <= 0.0 || r.dH_bound <= 0.0) continue;
    double x = std::log(r.dH_bound), y = std::log(r.dbl_empirical);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m >= 2) {
    double den = static_cast<double>(m) * sxx - sx * sx;
    rep.fitted_exponent = (static_cast<double>(m) * sxy - sx * sy) / den;
  }
  return rep;
}

inline std::string tightness_csv(const TightnessReport& rep) {
  std::string s =
      "# supmeas tightness v1\n"
      "n,i,h,N,gap_analytic,lip_measured,lower_bound,dH_bound,dbl_empirical,mc_stderr\n";
  char buf[360];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.n, r.i, r.h, r.caps, r.gap_analytic, r.lip_measured,
                  r.lower_bound, r.dH_bound, r.dbl_empirical, r.mc_stderr);
    s += buf;
  }
  return s;
}

} // namespace supmeas
