#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "supmeas/measures.hpp"
#include "supmeas/oracles.hpp"

using namespace supmeas;

namespace {

ConvexBody unit_cube3() {
  std::vector<Vec> vs;
  for (int a = 0; a <= 1; ++a)
    for (int b = 0; b <= 1; ++b)
      for (int c = 0; c <= 1; ++c)
        vs.push_back(Vec{double(a), double(b), double(c)});
  return ConvexBody::vpolytope(std::move(vs));
}

} // namespace

TEST_CASE("polytope oracle totals are the exact intrinsic volumes") {
  DiscreteMeasure l0 = polytope_support_measure_exact(unit_cube3(), 0);
  DiscreteMeasure l1 = polytope_support_measure_exact(unit_cube3(), 1);
  DiscreteMeasure l2 = polytope_support_measure_exact(unit_cube3(), 2);
  CHECK(l0.total_mass() == Catch::Approx(1.0).margin(1e-9));
  CHECK(l1.total_mass() == Catch::Approx(3.0).margin(1e-9));
  CHECK(l2.total_mass() == Catch::Approx(3.0).margin(1e-9));

  ConvexBody tri = ConvexBody::vpolytope({Vec{0.0, 0.0}, Vec{1.0, 0.0}, Vec{0.0, 1.0}});
  DiscreteMeasure t1 = polytope_support_measure_exact(tri, 1);
  CHECK(t1.total_mass() == Catch::Approx(0.5 * (2.0 + std::sqrt(2.0))).margin(1e-9));
}

TEST_CASE("ball oracle totals match the intrinsic-volume closed form") {
  ConvexBody B = ConvexBody::ball(Vec{0.2, -0.1, 0.0}, 0.7);
  for (std::size_t i = 0; i < 3; ++i) {
    DiscreteMeasure mu = ball_support_measure_exact(B, i, 0.05);
    CHECK(mu.total_mass() ==
          Catch::Approx(ball_intrinsic_volume(3, i, 0.7)).margin(1e-9));
  }
  // unit ball in R^2: V_0 = 1, V_1 = pi (half the perimeter)
  ConvexBody D = ConvexBody::ball(Vec{0.0, 0.0}, 1.0);
  CHECK(ball_intrinsic_volume(2, 1, 1.0) == Catch::Approx(std::numbers::pi).margin(1e-12));
  CHECK(ball_support_measure_exact(D, 1, 0.05).total_mass() ==
        Catch::Approx(std::numbers::pi).margin(1e-9));
}

TEST_CASE("extracted masses agree with the Steiner truth for the cube") {
  MeasureFamily fam = extract_support_measures(unit_cube3(), 200000, 21);
  const double truth[3] = {1.0, 3.0, 3.0};
  for (std::size_t i = 0; i < 3; ++i) {
    double se = fam.mass_stderr(i);
    CHECK(std::abs(fam.mass(i) - truth[i]) <= 4.0 * se);
    CHECK(se > 0.0);
  }
}

TEST_CASE("extracted masses agree with the independent Steiner fit") {
  ConvexBody tri = ConvexBody::vpolytope({Vec{0.0, 0.0}, Vec{1.2, 0.0}, Vec{0.3, 0.9}});
  MeasureFamily fam = extract_support_measures(tri, 200000, 22);
  SteinerFit fit = steiner_fit_intrinsic_volumes(tri, 200000, 23);
  for (std::size_t i = 0; i < 2; ++i) {
    double tol = 4.0 * std::hypot(fam.mass_stderr(i), fit.stderrs[i]);
    CHECK(std::abs(fam.mass(i) - fit.intrinsic[i]) <= tol);
  }
}

TEST_CASE("lambda atoms live on the normal bundle") {
  ConvexBody K = unit_cube3();
  MeasureFamily fam = extract_support_measures(K, 20000, 24);
  DiscreteMeasure l1 = fam.lambda(1);
  std::size_t checked = 0;
  for (std::size_t t = 0; t < l1.size() && checked < 500; ++t, ++checked) {
    Vec loc = l1.location(t);
    SupportPoint a{head(loc, 3), tail(loc, 3)};
    CHECK(normal_bundle_certificate(K, a, 1e-6));
  }
}

TEST_CASE("sphere marginal conventions") {
  ConvexBody B = ConvexBody::ball(Vec{0.0, 0.0, 0.0}, 1.0);
  DiscreteMeasure l2 = ball_support_measure_exact(B, 2, 0.05);
  DiscreteMeasure psi = sphere_marginal(l2, 2, 3, MarginalConvention::Psi);
  DiscreteMeasure sa = sphere_marginal(l2, 2, 3, MarginalConvention::SurfaceArea);
  CHECK(psi.total_mass() == Catch::Approx(l2.total_mass()).margin(1e-12));
  CHECK(sa.total_mass() == Catch::Approx(2.0 * l2.total_mass()).margin(1e-12));
  // S_i convention: factor n kappa_{n-i} / C(n,i)
  DiscreteMeasure l1 = ball_support_measure_exact(B, 1, 0.05);
  DiscreteMeasure s1 = sphere_marginal(l1, 1, 3, MarginalConvention::AreaMeasure);
  DimensionConstants dc(3);
  double factor = 3.0 * dc.kappa[2] / binomial(3, 1);
  CHECK(s1.total_mass() == Catch::Approx(factor * l1.total_mass()).margin(1e-9));
  CHECK_THROWS_AS(sphere_marginal(l1, 1, 3, MarginalConvention::SurfaceArea), Error);
}

TEST_CASE("extraction input validation") {
  CHECK_THROWS_AS(extract_support_measures(unit_cube3(), 2, 1), Error);
}
