#include <catch2/catch_amalgamated.hpp>

#include "supmeas/bounded_lipschitz.hpp"
#include "supmeas/rng.hpp"

using namespace supmeas;

namespace {

DiscreteMeasure random_measure(std::size_t dim, RngStream& rng, std::size_t atoms) {
  DiscreteMeasure m(SpaceTag::SigmaN, dim);
  for (std::size_t a = 0; a < atoms; ++a) {
    Vec p(dim);
    for (std::size_t k = 0; k < dim; ++k) p[k] = rng.uniform(-2.0, 2.0);
    m.add_atom(p, rng.uniform(0.0, 1.0));
  }
  return m;
}

} // namespace

TEST_CASE("two point masses: d_bL equals min(distance, 2)") {
  for (double t : {0.05, 0.5, 1.0, 1.9, 2.0, 2.5, 3.0, 10.0}) {
    DiscreteMeasure mu(SpaceTag::SigmaN, 3), nu(SpaceTag::SigmaN, 3);
    mu.add_atom(Vec{0.0, 0.0, 0.0}, 1.0);
    nu.add_atom(Vec{t, 0.0, 0.0}, 1.0);
    CHECK(bounded_lipschitz_distance(mu, nu).value ==
          Catch::Approx(std::min(t, 2.0)).margin(1e-9));
  }
}

TEST_CASE("d_bL metric axioms on random instances") {
  for (std::size_t trial = 0; trial < 25; ++trial) {
    RngStream rng(400, trial);
    std::size_t dim = 2 + rng.next_u64() % 3;
    DiscreteMeasure a = random_measure(dim, rng, 3 + rng.next_u64() % 6);
    DiscreteMeasure b = random_measure(dim, rng, 3 + rng.next_u64() % 6);
    DiscreteMeasure c = random_measure(dim, rng, 3 + rng.next_u64() % 6);
    double ab = bounded_lipschitz_distance(a, b).value;
    double ba = bounded_lipschitz_distance(b, a).value;
    double ac = bounded_lipschitz_distance(a, c).value;
    double bc = bounded_lipschitz_distance(b, c).value;
    double aa = bounded_lipschitz_distance(a, a).value;
    CHECK(aa <= 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab == Catch::Approx(ba).margin(1e-9));
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("total variation dominates d_bL and scaling is linear") {
  for (std::size_t trial = 0; trial < 20; ++trial) {
    RngStream rng(401, trial);
    DiscreteMeasure a = random_measure(3, rng, 8);
    DiscreteMeasure b = random_measure(3, rng, 8);
    DblResult r = bounded_lipschitz_distance(a, b);
    CHECK(r.value <= total_variation_distance(a, b) + 1e-9);

    const double c = 0.37;
    DiscreteMeasure as = a, bs = b;
    as.scale_weights(c);
    bs.scale_weights(c);
    CHECK(bounded_lipschitz_distance(as, bs).value ==
          Catch::Approx(c * r.value).margin(1e-9));
  }
}

TEST_CASE("translation bound: d_bL of a shifted copy is at most mass * shift") {
  RngStream rng(402, 0);
  DiscreteMeasure a = random_measure(3, rng, 12);
  for (double t : {0.01, 0.1, 0.5}) {
    DiscreteMeasure b(SpaceTag::SigmaN, 3);
    for (std::size_t k = 0; k < a.size(); ++k)
      b.add_atom(a.location(k) + Vec{t, 0.0, 0.0}, a.weight(k));
    double v = bounded_lipschitz_distance(a, b).value;
    CHECK(v <= t * a.total_mass() + 1e-9);
    CHECK(v >= 0.0);
  }
}

TEST_CASE("witness is feasible and attains the reported value") {
  for (std::size_t trial = 0; trial < 10; ++trial) {
    RngStream rng(403, trial);
    DiscreteMeasure a = random_measure(4, rng, 10);
    DiscreteMeasure b = random_measure(4, rng, 10);
    DblResult r = bounded_lipschitz_distance(a, b);
    const auto& w = r.witness;
    REQUIRE(w.values.size() == w.support.size());
    double obj = 0.0;
    for (std::size_t s = 0; s < w.support.size(); ++s) {
      CHECK(std::abs(w.values[s]) <= 1.0 + 1e-9);
      obj += w.values[s] * w.coeffs[s];
      for (std::size_t t2 = s + 1; t2 < w.support.size(); ++t2)
        CHECK(std::abs(w.values[s] - w.values[t2]) <=
              distance(w.support[s], w.support[t2]) + 1e-9);
    }
    CHECK(obj == Catch::Approx(r.value).margin(1e-9));
    CHECK(r.duality_gap <= 1e-8);
  }
}

TEST_CASE("grid coarsening discloses its worst-case movement") {
  RngStream rng(404, 0);
  DiscreteMeasure a = random_measure(3, rng, 40);
  DiscreteMeasure b = random_measure(3, rng, 40);
  double exact = bounded_lipschitz_distance(a, b).value;
  DblOptions opts;
  opts.grid = 0.5;
  DblResult coarse = bounded_lipschitz_distance(a, b, opts);
  CHECK(coarse.coarsening_error > 0.0);
  // moving mass by eps changes d_bL by at most eps (Lipschitz test functions)
  CHECK(std::abs(coarse.value - exact) <= coarse.coarsening_error + 1e-9);
}

TEST_CASE("common random numbers cancel exactly under coarsening") {
  RngStream rng(405, 0);
  DiscreteMeasure a = random_measure(3, rng, 30);
  DiscreteMeasure b = a; // identical atoms
  DblOptions opts;
  opts.grid = 0.3;
  DblResult r = bounded_lipschitz_distance(a, b, opts);
  CHECK(r.value == 0.0);
  CHECK(r.support_size == 0);
  CHECK(r.coarsening_error == 0.0);
}

TEST_CASE("atom cap raises TooManyAtoms") {
  RngStream rng(406, 0);
  DiscreteMeasure a = random_measure(2, rng, 50);
  DiscreteMeasure b = random_measure(2, rng, 50);
  DblOptions opts;
  opts.atom_cap = 10;
  try {
    bounded_lipschitz_distance(a, b, opts);
    FAIL("expected TooManyAtoms");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooManyAtoms);
  }
}

TEST_CASE("mismatched spaces are rejected") {
  DiscreteMeasure a(SpaceTag::SigmaN, 4);
  DiscreteMeasure b(SpaceTag::SigmaN, 6);
  a.add_atom(zero_vec(4), 1.0);
  b.add_atom(zero_vec(6), 1.0);
  CHECK_THROWS_AS(bounded_lipschitz_distance(a, b), Error);
}
