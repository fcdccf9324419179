#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "supmeas/hausdorff.hpp"
#include "supmeas/rng.hpp"
#include "supmeas/section4.hpp"

using namespace supmeas;

TEST_CASE("psi_cap_pairing matches the closed forms") {
  // n = 3, i = 1: (2/pi) sin h; n = 2, i = 1: sin h
  for (double h : {0.05, 0.1, 0.2, 0.3}) {
    CHECK(psi_cap_pairing(3, 1, h) ==
          Catch::Approx((2.0 / std::numbers::pi) * std::sin(h)).margin(1e-8));
    CHECK(psi_cap_pairing(2, 1, h) == Catch::Approx(std::sin(h)).margin(1e-8));
  }
  // frozen values
  CHECK(psi_cap_pairing(3, 1, 0.1) == Catch::Approx(0.0635559270).margin(1e-8));
  CHECK(psi_cap_pairing(2, 1, 0.3) == Catch::Approx(0.2955202067).margin(1e-8));
}

TEST_CASE("psi_ball_pairing leading coefficient via Richardson") {
  CHECK(psi_ball_leading_coefficient(3, 1) ==
        Catch::Approx(1.0 / std::numbers::pi).margin(1e-12));
  for (double h : {0.1, 0.05}) {
    double rel = std::abs(psi_ball_leading_richardson(3, 1, h) -
                          psi_ball_leading_coefficient(3, 1)) *
                 std::numbers::pi;
    CHECK(rel <= 0.01);
  }
}

TEST_CASE("psi pairings vanish with h and caps beat the ball") {
  double prev = 1e300;
  for (double h : {0.3, 0.2, 0.1, 0.05}) {
    double cap = psi_cap_pairing(3, 1, h);
    double ball = psi_ball_pairing(3, 1, h);
    CHECK(cap > ball);
    CHECK(ball > 0.0);
    CHECK(cap < prev);
    prev = cap;
  }
}

TEST_CASE("cap packing geometry") {
  for (double h : {0.3, 0.15, 0.08}) {
    CapConstruction c = build_cap_packing(3, 1, h);
    CHECK(c.cap_count() >= 1);
    // caps shrink no faster than the circumference allows
    CHECK(static_cast<double>(c.cap_count()) <= std::numbers::pi / h + 1.0);
    // the cut body is contained in the base body
    ConvexBody base = base_body(c), cut = cut_body(c);
    for (int axis = 0; axis < 3; ++axis)
      for (double sign : {-1.0, 1.0}) {
        Vec u = basis_vec(3, axis, sign);
        CHECK(support_function(cut, u) <= support_function(base, u) + 1e-9);
      }
    // cutting removes at most the cap height
    CHECK(hausdorff_distance(base, cut, 1e-4) <= (1.0 - std::cos(h)) + 1e-3);
  }
}

TEST_CASE("pairing function is bounded with Lipschitz ratio ~ 1/h") {
  CapConstruction c = build_cap_packing(3, 1, 0.2);
  RngStream rng(77, 0);
  double lip = measured_lipschitz(c, 77);
  CHECK(lip >= 1.0);
  CHECK(lip <= 2.0 / std::sin(0.2)); // analytic bound c/h
  CHECK(measured_lipschitz(c, 77) == lip); // deterministic per seed
  for (int t = 0; t < 500; ++t) {
    Vec u(3);
    for (int k = 0; k < 3; ++k) u[k] = rng.normal();
    u = normalized(u);
    CHECK(std::abs(eval_f(c, u)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("tightness point smoke test") {
  TightnessOptions opts;
  opts.samples = 30000;
  TightnessRow row = tightness_point(3, 1, 0.3, 17, opts);
  CHECK(row.caps >= 1);
  CHECK(row.dH_bound == Catch::Approx(1.0 - std::cos(0.3)).margin(1e-12));
  CHECK(row.gap_analytic > 0.0);
  CHECK(row.lower_bound > 0.0);
  CHECK(row.dbl_empirical > 0.0);
  CHECK(row.mc_stderr > 0.0);
  // the lower bound may not exceed the empirical value by more than noise
  CHECK(row.dbl_empirical >= row.lower_bound - 5.0 * row.mc_stderr);
}

TEST_CASE("tightness csv has the pinned schema") {
  TightnessReport rep;
  TightnessRow r;
  r.n = 3;
  r.i = 1;
  r.h = 0.25;
  rep.rows.push_back(r);
  std::string csv = tightness_csv(rep);
  CHECK(csv.rfind("# supmeas tightness v1\n", 0) == 0);
  CHECK(csv.find("n,i,h,N,gap_analytic,lip_measured,lower_bound,dH_bound,"
                 "dbl_empirical,mc_stderr") != std::string::npos);
}

TEST_CASE("section 4 input validation") {
  CHECK_THROWS_AS(build_cap_packing(3, 1, 0.0), Error);
  CHECK_THROWS_AS(build_cap_packing(3, 1, 2.0), Error);
  CHECK_THROWS_AS(build_cap_packing(3, 5, 0.2), Error);
}
