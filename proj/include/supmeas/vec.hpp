#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>

#include "supmeas/error.hpp"

namespace supmeas {

/// Small dense vector with runtime dimension and inline storage.
/// Capacity 12 covers points of Sigma^n = R^n x S^{n-1} up to n = 6.
class Vec {
public:
  static constexpr std::size_t kCapacity = 12;

  Vec() = default;
  explicit Vec(std::size_t dim) : dim_(dim) { data_.fill(0.0); check_dim(dim); }
  Vec(std::initializer_list<double> xs) : dim_(xs.size()) {
    check_dim(dim_);
    std::size_t k = 0;
    for (double x : xs) data_[k++] = x;
  }

  std::size_t size() const noexcept { return dim_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  const double* data() const noexcept { return data_.data(); }
  double* data() noexcept { return data_.data(); }

  Vec& operator+=(const Vec& o) {
    for (std::size_t i = 0; i < dim_; ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (std::size_t i = 0; i < dim_; ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (std::size_t i = 0; i < dim_; ++i) data_[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator/(Vec a, double s) { return a *= 1.0 / s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim_ != b.dim_) return false;
    for (std::size_t i = 0; i < a.dim_; ++i)
      if (a.data_[i] != b.data_[i]) return false;
    return true;
  }

  friend std::ostream& operator<<(std::ostream& os, const Vec& v) {
    os << '(';
    for (std::size_t i = 0; i < v.dim_; ++i) os << (i ? "," : "") << v.data_[i];
    return os << ')';
  }

private:
  static void check_dim(std::size_t dim) {
    if (dim > kCapacity) fail(ErrorKind::InvalidInput, "Vec dimension exceeds capacity");
  }

  std::size_t dim_ = 0;
  std::array<double, kCapacity> data_{};
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }
inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

inline Vec normalized(const Vec& a) {
  double n = norm(a);
  if (n == 0.0) fail(ErrorKind::InvalidInput, "cannot normalize zero vector");
  return a / n;
}

inline Vec zero_vec(std::size_t dim) { return Vec(dim); }

inline Vec basis_vec(std::size_t dim, std::size_t axis, double sign = 1.0) {
  Vec v(dim);
  v[axis] = sign;
  return v;
}

/// Concatenate two vectors; the atom layout for Sigma^n points is (x | u),
/// which makes the product Euclidean metric the plain Euclidean metric.
inline Vec concat(const Vec& a, const Vec& b) {
  Vec v(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) v[a.size() + i] = b[i];
  return v;
}

inline Vec head(const Vec& v, std::size_t k) {
  Vec r(k);
  for (std::size_t i = 0; i < k; ++i) r[i] = v[i];
  return r;
}

inline Vec tail(const Vec& v, std::size_t k) {
  Vec r(k);
  for (std::size_t i = 0; i < k; ++i) r[i] = v[v.size() - k + i];
  return r;
}

} // namespace supmeas
