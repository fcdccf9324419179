#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/error.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

enum class SpaceTag { SigmaN, Sphere };

inline const char* space_tag_name(SpaceTag t) {
  return t == SpaceTag::SigmaN ? "SigmaN" : "Sphere";
}

/// An atom location (x, u) of Sigma^n = R^n x S^{n-1}.
struct SupportPoint {
  Vec x;
  Vec u;

  /// Flattened (x | u) coordinates; the product Euclidean metric on Sigma^n
  /// is then the plain Euclidean distance on 2n coordinates.
  Vec flat() const { return concat(x, u); }
};

/// Certificate that (x, u) lies on the normal bundle of K:
/// x supports K in direction u and sits on the boundary.
inline bool normal_bundle_certificate(const ConvexBody& K, const SupportPoint& a,
                                      double tol = 1e-6) {
  if (std::abs(norm(a.u) - 1.0) > 1e-10) return false;
  if (std::abs(support_function(K, a.u) - dot(a.x, a.u)) > tol) return false;
  // boundary proximity: x must be in K but leave K under a small push along u
  if (distance_to(K, a.x) > tol) return false;
  return distance_to(K, a.x + (2.0 * tol) * a.u) > 0.0;
}

/// Weighted finite atom list on Sigma^n or S^{n-1}, stored columnar
/// (flat coordinate array + weight array). Weights may be signed in
/// intermediate form (Vandermonde combinations); `signed_mass` and
/// `total_mass` distinguish the two readings.
class DiscreteMeasure {
public:
  DiscreteMeasure(SpaceTag tag, std::size_t point_dim)
      : tag_(tag), dim_(point_dim) {}

  SpaceTag space_tag() const { return tag_; }
  /// Coordinates per atom (2n for SigmaN, n for Sphere).
  std::size_t point_dim() const { return dim_; }
  std::size_t size() const { return weights_.size(); }
  bool empty() const { return weights_.empty(); }

  void reserve(std::size_t m) {
    coords_.reserve(m * dim_);
    weights_.reserve(m);
  }

  void add_atom(const Vec& location, double weight) {
    if (location.size() != dim_)
      fail(ErrorKind::InvalidInput, "DiscreteMeasure: atom dimension mismatch");
    for (std::size_t k = 0; k < dim_; ++k) coords_.push_back(location[k]);
    weights_.push_back(weight);
  }

  void add_atom(const SupportPoint& a, double weight) { add_atom(a.flat(), weight); }

  Vec location(std::size_t j) const {
    Vec v(dim_);
    for (std::size_t k = 0; k < dim_; ++k) v[k] = coords_[j * dim_ + k];
    return v;
  }

  double weight(std::size_t j) const { return weights_[j]; }
  void set_weight(std::size_t j, double w) { weights_[j] = w; }
  void scale_weights(double a) {
    for (auto& w : weights_) w *= a;
  }

  const std::vector<double>& raw_coords() const { return coords_; }
  const std::vector<double>& raw_weights() const { return weights_; }

  double total_mass() const {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
  }
  double absolute_mass() const {
    double s = 0.0;
    for (double w : weights_) s += std::abs(w);
    return s;
  }

  /// Canonical atom order: lexicographic by coordinates, then weight.
  /// Makes serialized output independent of construction/work ordering.
  void canonicalize() {
    const std::size_t m = size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      for (std::size_t k = 0; k < dim_; ++k) {
        double ca = coords_[a * dim_ + k], cb = coords_[b * dim_ + k];
        if (ca != cb) return ca < cb;
      }
      return weights_[a] < weights_[b];
    });
    std::vector<double> nc(coords_.size());
    std::vector<double> nw(m);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < dim_; ++k)
        nc[j * dim_ + k] = coords_[order[j] * dim_ + k];
      nw[j] = weights_[order[j]];
    }
    coords_ = std::move(nc);
    weights_ = std::move(nw);
  }

private:
  SpaceTag tag_;
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

// --- serialization (versioned columnar text; hex floats round-trip bit-exactly)

inline constexpr const char* kMeasureFormatTag = "supmeas-measure";
inline constexpr int kMeasureFormatVersion = 1;

inline void write_measure(std::ostream& out, const DiscreteMeasure& mu) {
  out << kMeasureFormatTag << " v" << kMeasureFormatVersion << '\n';
  out << "space " << space_tag_name(mu.space_tag()) << '\n';
  out << "dim " << mu.point_dim() << '\n';
  out << "count " << mu.size() << '\n';
  // always emit in canonical order so identical measures serialize
  // identically regardless of construction order
  const std::size_t dim = mu.point_dim();
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t k = 0; k < dim; ++k) {
      double ca = mu.raw_coords()[a * dim + k], cb = mu.raw_coords()[b * dim + k];
      if (ca != cb) return ca < cb;
    }
    return mu.weight(a) < mu.weight(b);
  });
  char buf[40];
  for (std::size_t j : order) {
    for (std::size_t k = 0; k < dim; ++k) {
      std::snprintf(buf, sizeof buf, "%a", mu.raw_coords()[j * dim + k]);
      out << buf << ' ';
    }
    std::snprintf(buf, sizeof buf, "%a", mu.weight(j));
    out << buf << '\n';
  }
}

inline void save_measure(const std::string& path, const DiscreteMeasure& mu) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::InvalidInput, "cannot open for writing: " + path);
  write_measure(out, mu);
  if (!out) fail(ErrorKind::InvalidInput, "write failed: " + path);
}

inline DiscreteMeasure read_measure(std::istream& in) {
  std::string tag, ver;
  if (!(in >> tag >> ver) || tag != kMeasureFormatTag)
    fail(ErrorKind::InvalidInput, "measure file: bad format tag");
  if (ver != "v1")
    fail(ErrorKind::InvalidInput, "measure file: unsupported version " + ver);
  std::string key, space;
  std::size_t dim = 0, count = 0;
  if (!(in >> key >> space) || key != "space")
    fail(ErrorKind::InvalidInput, "measure file: missing space");
  SpaceTag st;
  if (space == "SigmaN")
    st = SpaceTag::SigmaN;
  else if (space == "Sphere")
    st = SpaceTag::Sphere;
  else
    fail(ErrorKind::InvalidInput, "measure file: unknown space " + space);
  if (!(in >> key >> dim) || key != "dim" || dim == 0 || dim > 2 * kMaxDim)
    fail(ErrorKind::InvalidInput, "measure file: bad dim");
  if (!(in >> key >> count) || key != "count")
    fail(ErrorKind::InvalidInput, "measure file: bad count");
  DiscreteMeasure mu(st, dim);
  mu.reserve(count);
  std::string tok;
  Vec loc(dim);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t k = 0; k <= dim; ++k) {
      if (!(in >> tok))
        fail(ErrorKind::InvalidInput, "measure file: truncated row");
      char* end = nullptr;
      double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        fail(ErrorKind::InvalidInput, "measure file: bad number '" + tok + "'");
      if (k < dim)
        loc[k] = v;
      else
        mu.add_atom(loc, v);
    }
  }
  return mu;
}

inline DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidInput, "cannot open: " + path);
  return read_measure(in);
}

} // namespace supmeas
