#include <catch2/catch_amalgamated.hpp>

#include "supmeas/body.hpp"
#include "supmeas/body_io.hpp"
#include "supmeas/rng.hpp"

using namespace supmeas;

namespace {

std::vector<ConvexBody> gallery() {
  std::vector<ConvexBody> out;
  out.push_back(ConvexBody::vpolytope({Vec{0.0, 0.0}, Vec{1.0, 0.0},
                                       Vec{1.0, 1.0}, Vec{0.0, 1.0}}));
  out.push_back(ConvexBody::ball(Vec{0.3, -0.2, 0.1}, 0.8));
  out.push_back(ConvexBody::hpolytope({Halfspace{Vec{1.0, 0.0}, 1.0},
                                       Halfspace{Vec{-1.0, 0.0}, 0.0},
                                       Halfspace{Vec{0.0, 1.0}, 2.0},
                                       Halfspace{Vec{0.0, -1.0}, 0.0}}));
  // unit disc of the (e1,e2)-plane in R^3: ball cut by the +-e3 slab
  out.push_back(ConvexBody::ball_cut(Vec{0.0, 0.0, 0.0}, 1.0,
                                     {Halfspace{Vec{0.0, 0.0, 1.0}, 0.0},
                                      Halfspace{Vec{0.0, 0.0, -1.0}, 0.0}}));
  out.push_back(ConvexBody::vpolytope({Vec{0.0, 0.0, 0.0}, Vec{1.0, 0.0, 0.0},
                                       Vec{0.0, 1.0, 0.0}, Vec{0.0, 0.0, 1.0}},
                                      0.25)); // rounded simplex
  return out;
}

Vec random_point(std::size_t n, RngStream& rng, double scale) {
  Vec x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = rng.uniform(-scale, scale);
  return x;
}

} // namespace

TEST_CASE("projection is idempotent, 1-Lipschitz, and variational") {
  std::size_t body_id = 0;
  for (const auto& K : gallery()) {
    RngStream rng(90, body_id++);
    const std::size_t n = K.dim();
    for (int t = 0; t < 200; ++t) {
      Vec x = random_point(n, rng, 2.5);
      Vec y = random_point(n, rng, 2.5);
      ProjectionResult px = project(K, x), py = project(K, y);
      // idempotence: the foot point is its own foot point
      CHECK(distance(project(K, px.p).p, px.p) <= 1e-7);
      // contraction
      CHECK(distance(px.p, py.p) <= distance(x, y) + 1e-9);
      if (px.d > 0.0) {
        REQUIRE(px.u.has_value());
        CHECK(norm(*px.u) == Catch::Approx(1.0).margin(1e-9));
        CHECK(distance(px.p + px.d * (*px.u), x) <= 1e-8);
        // variational inequality against random feasible points
        for (int s = 0; s < 10; ++s) {
          Vec q = project(K, random_point(n, rng, 1.5)).p;
          CHECK(dot(x - px.p, q - px.p) <= 1e-7);
        }
      }
    }
  }
}

TEST_CASE("support function dominates all feasible points") {
  std::size_t body_id = 0;
  for (const auto& K : gallery()) {
    RngStream rng(91, body_id++);
    const std::size_t n = K.dim();
    for (int t = 0; t < 100; ++t) {
      Vec u(n);
      for (std::size_t k = 0; k < n; ++k) u[k] = rng.normal();
      u = normalized(u);
      double h = support_function(K, u);
      for (int s = 0; s < 10; ++s) {
        Vec q = project(K, random_point(n, rng, 2.0)).p;
        CHECK(dot(q, u) <= h + 1e-7);
      }
    }
  }
}

TEST_CASE("ball support and projection closed forms") {
  ConvexBody B = ConvexBody::ball(Vec{1.0, -2.0}, 3.0);
  Vec u = normalized(Vec{3.0, 4.0});
  CHECK(support_function(B, u) == Catch::Approx(dot(B.center(), u) + 3.0).margin(1e-12));
  Vec x{1.0, 4.0}; // distance 6 from center, 3 from the sphere
  ProjectionResult r = project(B, x);
  CHECK(r.d == Catch::Approx(3.0).margin(1e-12));
  CHECK(distance(r.p, Vec{1.0, 1.0}) <= 1e-12);
}

TEST_CASE("translated bodies and outer radius behave additively") {
  ConvexBody K = ConvexBody::vpolytope({Vec{0.0, 0.0}, Vec{1.0, 0.0}, Vec{0.0, 1.0}});
  Vec t{0.25, -0.5};
  ConvexBody L = K.translated(t);
  RngStream rng(92, 0);
  for (int s = 0; s < 100; ++s) {
    Vec x = random_point(2, rng, 2.0);
    CHECK(distance(project(L, x).p, project(K, x - t).p + t) <= 1e-9);
  }
  ConvexBody M = K.with_outer_radius(0.5);
  Vec far{10.0, 0.0};
  CHECK(project(M, far).d == Catch::Approx(project(K, far).d - 0.5).margin(1e-9));
}

TEST_CASE("circumradius bound contains the body") {
  std::size_t body_id = 0;
  for (const auto& K : gallery()) {
    double R = circumradius_bound(K);
    RngStream rng(93, body_id++);
    for (int s = 0; s < 200; ++s) {
      Vec q = project(K, random_point(K.dim(), rng, 3.0)).p;
      CHECK(norm(q) <= R + 1e-9);
    }
  }
}

TEST_CASE("bounding box contains the parallel body") {
  for (const auto& K : gallery()) {
    Box box = bounding_box(K, 0.5);
    for (std::size_t axis = 0; axis < K.dim(); ++axis) {
      CHECK(box.hi[axis] >= support_function(K, basis_vec(K.dim(), axis)) + 0.5 - 1e-9);
      CHECK(box.lo[axis] <=
            -support_function(K, basis_vec(K.dim(), axis, -1.0)) - 0.5 + 1e-9);
    }
  }
}

TEST_CASE("body grammar round-trips every gallery body") {
  std::size_t body_id = 0;
  for (const auto& K : gallery()) {
    if (K.kind() == BodyKind::HPolytope) continue; // vertices not stored
    ConvexBody L = parse_body(body_to_text(K));
    CHECK(L.kind() == K.kind());
    CHECK(L.dim() == K.dim());
    RngStream rng(94, body_id++);
    for (int s = 0; s < 100; ++s) {
      Vec x = random_point(K.dim(), rng, 2.0);
      CHECK(distance(project(L, x).p, project(K, x).p) <= 1e-12);
    }
  }
  ConvexBody H = parse_body(
      "kind hpolytope\n"
      "halfspace 1 0 1\n"
      "halfspace -1 0 0\n"
      "halfspace 0 1 1 # unit square\n"
      "halfspace 0 -1 0\n");
  CHECK(support_function(H, Vec{1.0, 0.0}) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("body parser rejects malformed input") {
  CHECK_THROWS_AS(parse_body("kind banana\n"), Error);
  CHECK_THROWS_AS(parse_body("kind ball\nradius 1\n"), Error);
  CHECK_THROWS_AS(parse_body("kind ball\ncenter 0 0\nradius x\n"), Error);
  CHECK_THROWS_AS(parse_body("vertex 0 0\n"), Error);
}
