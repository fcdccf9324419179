#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "supmeas/error.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

namespace detail {

/// van der Corput radical inverse in the given base.
inline double radical_inverse(std::size_t index, std::size_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Inverse standard-normal CDF (Acklam's rational approximation, ~1e-9
/// relative accuracy — ample for quasi-random direction nets).
inline double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p <= 0.0 || p >= 1.0)
    fail(ErrorKind::InvalidInput, "inverse_normal_cdf: p outside (0,1)");
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace detail

/// Deterministic low-discrepancy net of `count` unit vectors on S^{n-1}.
///   n = 1: the two endpoints alternated.
///   n = 2: equally spaced angles.
///   n = 3: Fibonacci spiral.
///   n >= 4: Halton points pushed through the normal quantile and normalized.
inline std::vector<Vec> sphere_net(std::size_t n, std::size_t count) {
  if (n == 0) fail(ErrorKind::InvalidInput, "sphere_net: n = 0");
  if (count == 0) return {};
  std::vector<Vec> net;
  net.reserve(count);
  if (n == 1) {
    for (std::size_t k = 0; k < count; ++k)
      net.push_back(basis_vec(1, 0, k % 2 == 0 ? 1.0 : -1.0));
    return net;
  }
  if (n == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      double th = 2.0 * std::numbers::pi * (static_cast<double>(k) + 0.5) /
                  static_cast<double>(count);
      Vec v(2);
      v[0] = std::cos(th);
      v[1] = std::sin(th);
      net.push_back(v);
    }
    return net;
  }
  if (n == 3) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (std::size_t k = 0; k < count; ++k) {
      double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = 2.0 * std::numbers::pi * static_cast<double>(k) / golden;
      Vec v(3);
      v[0] = r * std::cos(th);
      v[1] = r * std::sin(th);
      v[2] = z;
      net.push_back(v);
    }
    return net;
  }
  static const std::size_t primes[] = {2, 3, 5, 7, 11, 13};
  if (n > 6) fail(ErrorKind::InvalidInput, "sphere_net: n > 6 unsupported");
  for (std::size_t k = 0; k < count; ++k) {
    Vec g(n);
    for (std::size_t j = 0; j < n; ++j) {
      double u = detail::radical_inverse(k + 1, primes[j]);
      // keep strictly inside (0,1) for the quantile
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      g[j] = detail::inverse_normal_cdf(u);
    }
    double ng = norm(g);
    if (ng < 1e-12) {
      g = basis_vec(n, 0);
      ng = 1.0;
    }
    net.push_back(g / ng);
  }
  return net;
}

} // namespace supmeas
