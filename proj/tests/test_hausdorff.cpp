#include <catch2/catch_amalgamated.hpp>

#include "supmeas/body.hpp"
#include "supmeas/hausdorff.hpp"

using namespace supmeas;

namespace {

ConvexBody square(double lo, double hi) {
  return ConvexBody::vpolytope({Vec{lo, lo}, Vec{hi, lo}, Vec{hi, hi}, Vec{lo, hi}});
}

} // namespace

TEST_CASE("hausdorff bracket encloses known distances") {
  SECTION("translated square: distance equals the shift") {
    ConvexBody K = square(0.0, 1.0);
    ConvexBody L = K.translated(Vec{0.3, 0.0});
    HausdorffBracket br = hausdorff_bracket(K, L, 1e-5);
    CHECK(br.lo <= 0.3 + 1e-12);
    CHECK(br.hi >= 0.3 - 1e-12);
    CHECK(br.hi - br.lo <= 1e-5 + 1e-12);
  }
  SECTION("concentric balls: distance equals the radius gap") {
    ConvexBody A = ConvexBody::ball(Vec{0.1, 0.2, 0.0}, 1.0);
    ConvexBody B = ConvexBody::ball(Vec{0.1, 0.2, 0.0}, 1.4);
    CHECK(hausdorff_distance(A, B, 1e-6) == Catch::Approx(0.4).margin(1e-5));
  }
  SECTION("square vs inscribed-circle rounding") {
    // [-1,1]^2 vs its unit inscribed ball: farthest square point is the
    // corner at distance sqrt(2) - 1 from the ball
    ConvexBody K = square(-1.0, 1.0);
    ConvexBody B = ConvexBody::ball(Vec{0.0, 0.0}, 1.0);
    CHECK(hausdorff_distance(K, B, 1e-5) ==
          Catch::Approx(std::sqrt(2.0) - 1.0).margin(1e-4));
  }
  SECTION("identical bodies: distance is zero") {
    ConvexBody K = square(0.0, 1.0);
    CHECK(hausdorff_distance(K, K, 1e-6) <= 1e-6);
  }
}

TEST_CASE("hausdorff is symmetric and respects the triangle inequality") {
  ConvexBody A = square(0.0, 1.0);
  ConvexBody B = A.translated(Vec{0.2, 0.1});
  ConvexBody C = ConvexBody::ball(Vec{0.5, 0.5}, 0.7);
  double ab = hausdorff_distance(A, B, 1e-5);
  double ba = hausdorff_distance(B, A, 1e-5);
  double bc = hausdorff_distance(B, C, 1e-5);
  double ac = hausdorff_distance(A, C, 1e-5);
  CHECK(ab == Catch::Approx(ba).margin(2e-5));
  CHECK(ac <= ab + bc + 3e-5);
}

TEST_CASE("minkowski rounding shifts the distance by the added radius") {
  ConvexBody K = square(0.0, 1.0);
  for (double r : {0.1, 0.25}) {
    double d = hausdorff_distance(K, K.with_outer_radius(r), 1e-5);
    CHECK(d == Catch::Approx(r).margin(1e-4));
  }
}
