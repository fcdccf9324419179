#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "supmeas/error.hpp"

namespace supmeas {

/// kappa_j (volume of the unit j-ball) and omega_k = k*kappa_k
/// (surface content of the unit (k-1)-sphere), tabulated per dimension.
///
/// kappa_0 = 1, kappa_1 = 2, and kappa_j = kappa_{j-2} * 2*pi/j.
struct DimensionConstants {
  std::size_t n = 0;
  std::vector<double> kappa; // kappa[0..n]
  std::vector<double> omega; // omega[0..n], omega[0] unused (= 0)

  explicit DimensionConstants(std::size_t dim) : n(dim) {
    kappa.resize(n + 1);
    omega.resize(n + 1, 0.0);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == 0)
        kappa[j] = 1.0;
      else if (j == 1)
        kappa[j] = 2.0;
      else
        kappa[j] = kappa[j - 2] * 2.0 * std::numbers::pi / static_cast<double>(j);
      if (j >= 1) omega[j] = static_cast<double>(j) * kappa[j];
    }
  }
};

inline double unit_ball_volume(std::size_t j) {
  return DimensionConstants(j).kappa[j];
}

inline double sphere_surface(std::size_t k) {
  if (k == 0) fail(ErrorKind::InvalidInput, "omega_0 undefined");
  return DimensionConstants(k).omega[k];
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i)
    r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

/// Intrinsic volume V_i of a ball of radius r in R^n.
inline double ball_intrinsic_volume(std::size_t n, std::size_t i, double r) {
  DimensionConstants dc(n);
  double p = 1.0;
  for (std::size_t k = 0; k < i; ++k) p *= r;
  return binomial(n, i) * dc.kappa[n] / dc.kappa[n - i] * p;
}

} // namespace supmeas
