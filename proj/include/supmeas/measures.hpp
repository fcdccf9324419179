#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/constants.hpp"
#include "supmeas/error.hpp"
#include "supmeas/measure.hpp"
#include "supmeas/rng.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

namespace detail {

inline constexpr std::size_t kSampleBlock = 1 << 16;

/// Runs fn(block_index) for blocks 0..nblocks-1 on `workers` threads.
/// Blocks own disjoint output slots, so results are scheduling-independent.
template <typename Fn>
void parallel_blocks(std::size_t nblocks, std::size_t workers, const Fn& fn) {
  if (workers <= 1 || nblocks <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < nblocks; b += workers) fn(b);
    });
  for (auto& t : pool) t.join();
}

inline Vec uniform_in_box(const Box& box, RngStream& rng) {
  const std::size_t n = box.lo.size();
  Vec x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
  return x;
}

} // namespace detail

/// One point uniform in the shell K^rho = K_rho \ K by rejection from the
/// bounding box (the box may be passed in to share samples across bodies).
inline Vec parallel_shell_sample(const ConvexBody& K, double rho, RngStream& rng,
                                 const Box* shared_box = nullptr,
                                 std::size_t max_attempts = 1 << 24) {
  if (rho <= 0.0) fail(ErrorKind::InvalidInput, "parallel_shell_sample: rho <= 0");
  Box local = shared_box ? *shared_box : bounding_box(K, rho);
  for (std::size_t a = 0; a < max_attempts; ++a) {
    Vec x = detail::uniform_in_box(local, rng);
    double d = distance_to(K, x);
    if (d > 0.0 && d <= rho) return x;
  }
  fail(ErrorKind::DegenerateShell, "parallel_shell_sample: no acceptance");
}

/// Empirical local parallel-volume measure: N box samples, accepted points x
/// with 0 < d_K(x) <= rho become atoms (p_K(x), u_K(x)) of weight
/// vol(box)/N. Total mass is an unbiased estimator of vol(K^rho).
///
/// Blocks of 2^16 samples use counter-derived substreams (seed, stream0 + b),
/// so output is identical for any worker count.
inline DiscreteMeasure empirical_parallel_measure(
    const ConvexBody& K, double rho, std::size_t N, std::uint64_t seed,
    std::uint64_t stream0 = 0, const Box* shared_box = nullptr,
    std::size_t workers = 1) {
  if (rho <= 0.0 || N == 0)
    fail(ErrorKind::InvalidInput, "empirical_parallel_measure: bad rho or N");
  const std::size_t n = K.dim();
  Box box = shared_box ? *shared_box : bounding_box(K, rho);
  const double atom_weight = box.volume() / static_cast<double>(N);

  const std::size_t nblocks = (N + detail::kSampleBlock - 1) / detail::kSampleBlock;
  std::vector<std::vector<double>> block_coords(nblocks);
  detail::parallel_blocks(nblocks, workers, [&](std::size_t b) {
    RngStream rng(seed, stream0 + b);
    const std::size_t lo = b * detail::kSampleBlock;
    const std::size_t hi = std::min(N, lo + detail::kSampleBlock);
    auto& out = block_coords[b];
    for (std::size_t s = lo; s < hi; ++s) {
      Vec x = detail::uniform_in_box(box, rng);
      ProjectionResult pr = project(K, x);
      if (pr.d > 0.0 && pr.d <= rho) {
        for (std::size_t k = 0; k < n; ++k) out.push_back(pr.p[k]);
        for (std::size_t k = 0; k < n; ++k) out.push_back((*pr.u)[k]);
      }
    }
  });

  DiscreteMeasure mu(SpaceTag::SigmaN, 2 * n);
  std::size_t accepted = 0;
  for (const auto& bc : block_coords) accepted += bc.size() / (2 * n);
  if (accepted == 0)
    fail(ErrorKind::DegenerateShell, "empirical_parallel_measure: empty shell estimate");
  mu.reserve(accepted);
  Vec loc(2 * n);
  for (const auto& bc : block_coords)
    for (std::size_t j = 0; j * 2 * n < bc.size(); ++j) {
      for (std::size_t k = 0; k < 2 * n; ++k) loc[k] = bc[j * 2 * n + k];
      mu.add_atom(loc, atom_weight);
    }
  return mu;
}

namespace detail {

/// Solves the square system M a = rhs by Gaussian elimination with partial
/// pivoting; n <= 7 here.
inline std::vector<double> solve_dense(std::vector<double> M, std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(M[r * n + col]) > std::abs(M[piv * n + col])) piv = r;
    if (std::abs(M[piv * n + col]) < 1e-300)
      fail(ErrorKind::IllConditioned, "solve_dense: singular matrix");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(M[col * n + k], M[piv * n + k]);
      std::swap(rhs[col], rhs[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = M[r * n + col] / M[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) M[r * n + k] -= f * M[col * n + k];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = rhs[ri];
    for (std::size_t k = ri + 1; k < n; ++k) s -= M[ri * n + k] * x[k];
    x[ri] = s / M[ri * n + ri];
  }
  return x;
}

} // namespace detail

/// Coefficients a_{ij} (row i, column j; both 0-based, j indexing radii
/// rho_j = (j+1)/n) with Lambda_i = sum_j a_{ij} mu_{K,rho_j}. Derived from
/// the expansion mu_{K,rho} = sum_i rho^{n-i} kappa_{n-i} Lambda_i.
inline std::vector<double> vandermonde_coefficients(std::size_t n,
                                                    double residual_tol = 1e-8) {
  DimensionConstants dc(n);
  // M[j][i] = rho_j^{n-i} kappa_{n-i}
  std::vector<double> M(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    double rho = static_cast<double>(j + 1) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      M[j * n + i] = std::pow(rho, static_cast<double>(n - i)) * dc.kappa[n - i];
  }
  // column e_j of the inverse per solve; a_{ij} = (M^{-1})[i][j]
  std::vector<double> A(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    std::vector<double> col = detail::solve_dense(M, e);
    for (std::size_t i = 0; i < n; ++i) A[i * n + j] = col[i];
  }
  // residual ||A M - I||_max
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += A[i * n + k] * M[k * n + j];
      res = std::max(res, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  if (res > residual_tol)
    fail(ErrorKind::IllConditioned, "vandermonde_coefficients: residual " +
                                        std::to_string(res));
  return A;
}

/// The n discrete estimates of Lambda_0..Lambda_{n-1}. Parallel-measure atoms
/// are stored once per radius; per-index measures are materialized on demand
/// as signed pooled combinations (design: signed weights retained).
class MeasureFamily {
public:
  /// `box_source`: body whose per-radius bounding boxes are used for the
  /// rejection sampling (common-random-number comparisons pass the same
  /// box_source and seed for both bodies; it must contain K).
  MeasureFamily(const ConvexBody& K, std::size_t N, std::uint64_t seed,
                std::uint64_t stream0 = 0, std::size_t workers = 1,
                const ConvexBody* box_source = nullptr)
      : n_(K.dim()), N_(N), seed_(seed) {
    coeff_ = vandermonde_coefficients(n_);
    radii_.resize(n_);
    parallel_.reserve(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      radii_[j] = static_cast<double>(j + 1) / static_cast<double>(n_);
      Box box = bounding_box(box_source ? *box_source : K, radii_[j]);
      // disjoint substream band per radius
      std::uint64_t band = stream0 + j * (std::uint64_t{1} << 32);
      parallel_.push_back(
          empirical_parallel_measure(K, radii_[j], N, seed, band, &box, workers));
      boxvol_.push_back(box.volume());
    }
  }

  std::size_t dim() const { return n_; }
  std::size_t sample_count() const { return N_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& radii() const { return radii_; }
  const DiscreteMeasure& parallel_measure(std::size_t j) const { return parallel_[j]; }
  double coefficient(std::size_t i, std::size_t j) const { return coeff_[i * n_ + j]; }

  /// Signed pooled estimate of Lambda_i.
  DiscreteMeasure lambda(std::size_t i) const {
    check_index(i);
    DiscreteMeasure out(SpaceTag::SigmaN, 2 * n_);
    std::size_t total = 0;
    for (const auto& mu : parallel_) total += mu.size();
    out.reserve(total);
    for (std::size_t j = 0; j < n_; ++j) {
      const double a = coefficient(i, j);
      const auto& mu = parallel_[j];
      for (std::size_t t = 0; t < mu.size(); ++t)
        out.add_atom(mu.location(t), a * mu.weight(t));
    }
    return out;
  }

  /// Total mass of lambda(i) without materializing atoms.
  double mass(std::size_t i) const {
    check_index(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j)
      s += coefficient(i, j) * parallel_[j].total_mass();
    return s;
  }

  /// Monte-Carlo standard error of mass(i): binomial acceptance noise
    /// propagated through the signed combination.
  double mass_stderr(std::size_t i) const {
    check_index(i);
    double var = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      double p = parallel_[j].total_mass() / boxvol_[j]; // acceptance estimate
      p = std::min(std::max(p, 0.0), 1.0);
      double se_mass = boxvol_[j] * std::sqrt(p * (1.0 - p) / static_cast<double>(N_));
      double c = coefficient(i, j) * se_mass;
      var += c * c;
    }
    return std::sqrt(var);
  }

private:
  void check_index(std::size_t i) const {
    if (i >= n_) fail(ErrorKind::InvalidInput, "MeasureFamily: index out of range");
  }

  std::size_t n_;
  std::size_t N_;
  std::uint64_t seed_;
  std::vector<double> radii_;
  std::vector<double> coeff_;
  std::vector<DiscreteMeasure> parallel_;
  std::vector<double> boxvol_;
};

inline MeasureFamily extract_support_measures(const ConvexBody& K, std::size_t N,
                                              std::uint64_t seed,
                                              std::uint64_t stream0 = 0,
                                              std::size_t workers = 1,
                                              const ConvexBody* box_source = nullptr) {
  if (N < K.dim())
    fail(ErrorKind::InvalidInput, "extract_support_measures: N < n");
  return MeasureFamily(K, N, seed, stream0, workers, box_source);
}

enum class MarginalConvention { Psi, AreaMeasure, SurfaceArea };

/// Sphere marginal of a Sigma^n measure: drops the x slot.
/// Conventions: Psi_i = Lambda_i(K, R^n x .) (factor 1);
/// S_i = (n kappa_{n-i} / C(n,i)) Psi_i; SurfaceArea = S_{n-1} = 2 Lambda_{n-1}
/// (the i = n-1 case of the same factor).
inline DiscreteMeasure sphere_marginal(const DiscreteMeasure& mu, std::size_t i,
                                       std::size_t n,
                                       MarginalConvention conv = MarginalConvention::Psi) {
  if (mu.space_tag() != SpaceTag::SigmaN)
    fail(ErrorKind::InvalidInput, "sphere_marginal: measure not on SigmaN");
  if (mu.point_dim() != 2 * n)
    fail(ErrorKind::InvalidInput, "sphere_marginal: dimension mismatch");
  double factor = 1.0;
  if (conv == MarginalConvention::SurfaceArea) {
    if (i != n - 1)
      fail(ErrorKind::InvalidInput, "sphere_marginal: S_{n-1} needs i = n-1");
    factor = 2.0;
  } else if (conv == MarginalConvention::AreaMeasure) {
    DimensionConstants dc(n);
    factor = static_cast<double>(n) * dc.kappa[n - i] / binomial(n, i);
  }
  DiscreteMeasure out(SpaceTag::Sphere, n);
  out.reserve(mu.size());
  Vec u(n);
  for (std::size_t t = 0; t < mu.size(); ++t) {
    Vec loc = mu.location(t);
    for (std::size_t k = 0; k < n; ++k) u[k] = loc[n + k];
    out.add_atom(u, factor * mu.weight(t));
  }
  return out;
}

/// Independent intrinsic-volume oracle: Monte-Carlo volumes of K_rho at the
/// n+1 radii {0.5, 1.0, ..., (n+1)/2} fitted to the Steiner polynomial
/// vol(K_rho) = sum_{i=0}^{n} kappa_{n-i} rho^{n-i} V_i (with V_n the body
/// volume). Radii deliberately differ from the extraction radii.
struct SteinerFit {
  std::vector<double> intrinsic; // V_0..V_n
  std::vector<double> stderrs;   // same indexing
};

inline SteinerFit steiner_fit_intrinsic_volumes(const ConvexBody& K, std::size_t N,
                                                std::uint64_t seed,
                                                std::uint64_t stream0 = 0,
                                                std::size_t workers = 1) {
  const std::size_t n = K.dim();
  const std::size_t m = n + 1;
  std::vector<double> radii(m), vols(m), sev(m);
  for (std::size_t t = 0; t < m; ++t) radii[t] = 0.5 * static_cast<double>(t + 1);

  for (std::size_t t = 0; t < m; ++t) {
    Box box = bounding_box(K, radii[t]);
    const std::size_t nblocks = (N + detail::kSampleBlock - 1) / detail::kSampleBlock;
    std::vector<std::size_t> hits(nblocks, 0);
    std::uint64_t band = stream0 + (t + 16) * (std::uint64_t{1} << 32);
    detail::parallel_blocks(nblocks, workers, [&](std::size_t b) {
      RngStream rng(seed, band + b);
      const std::size_t lo = b * detail::kSampleBlock;
      const std::size_t hi = std::min(N, lo + detail::kSampleBlock);
      std::size_t acc = 0;
      for (std::size_t s = lo; s < hi; ++s) {
        Vec x = detail::uniform_in_box(box, rng);
        if (distance_to(K, x) <= radii[t]) ++acc;
      }
      hits[b] = acc;
    });
    std::size_t acc = 0;
    for (auto h : hits) acc += h;
    double p = static_cast<double>(acc) / static_cast<double>(N);
    vols[t] = p * box.volume();
    sev[t] = box.volume() * std::sqrt(p * (1.0 - p) / static_cast<double>(N));
  }

  // square system: m radii, m unknowns V_0..V_n
  std::vector<double> M(m * m);
  for (std::size_t t = 0; t < m; ++t)
    for (std::size_t i = 0; i <= n; ++i)
      M[t * m + i] = DimensionConstants(n).kappa[n - i] *
                     std::pow(radii[t], static_cast<double>(n - i));
  SteinerFit fit;
  fit.intrinsic = detail::solve_dense(M, vols);
  // propagate independent per-radius errors through the inverse
  fit.stderrs.assign(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<double> e(m, 0.0);
    e[t] = 1.0;
    std::vector<double> col = detail::solve_dense(M, e);
    for (std::size_t i = 0; i < m; ++i)
      fit.stderrs[i] += col[i] * col[i] * sev[t] * sev[t];
  }
  for (auto& s : fit.stderrs) s = std::sqrt(s);
  return fit;
}

} // namespace supmeas
