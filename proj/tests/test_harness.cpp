#include <catch2/catch_amalgamated.hpp>

#include "supmeas/config.hpp"
#include "supmeas/harness.hpp"
#include "supmeas/hausdorff.hpp"

using namespace supmeas;

namespace {

ConvexBody unit_square() {
  return ConvexBody::vpolytope(
      {Vec{0.0, 0.0}, Vec{1.0, 0.0}, Vec{1.0, 1.0}, Vec{0.0, 1.0}});
}

const char* kConfigText =
    "# sample experiment\n"
    "seed 9\n"
    "samples 5000\n"
    "grid 0.1\n"
    "body K\n"
    "  kind vpolytope\n"
    "  vertex 0 0\n"
    "  vertex 1 0\n"
    "  vertex 1 1\n"
    "  vertex 0 1\n"
    "end\n"
    "body L\n"
    "  kind ball\n"
    "  center 0.5 0.5\n"
    "  radius 0.4\n"
    "end\n"
    "family\n"
    "  kind translate\n"
    "  direction 1 0\n"
    "  ladder 0.2 0.1 0.05\n"
    "end\n"
    "lemma41\n"
    "  rho 0.5\n"
    "end\n";

} // namespace

TEST_CASE("config grammar parses bodies, family, and options") {
  Config cfg = parse_config(kConfigText);
  CHECK(cfg.seed == 9);
  CHECK(cfg.samples == 5000);
  CHECK(cfg.grid == Catch::Approx(0.1));
  REQUIRE(cfg.body_order.size() == 2);
  CHECK(cfg.body_order[0] == "K");
  CHECK(cfg.bodies.at("K").kind() == BodyKind::VPolytope);
  CHECK(cfg.bodies.at("L").kind() == BodyKind::Ball);
  REQUIRE(cfg.family.has_value());
  CHECK(cfg.family->kind == FamilyKind::Translate);
  REQUIRE(cfg.family->ladder.size() == 3);
  CHECK(cfg.family->ladder[2] == Catch::Approx(0.05));
  CHECK(cfg.lemma41_rho == Catch::Approx(0.5));
}

TEST_CASE("config parser rejects malformed input") {
  CHECK_THROWS_AS(parse_config("bogus 1\n"), Error);
  CHECK_THROWS_AS(parse_config("body K\nkind ball\n"), Error); // unterminated
  CHECK_THROWS_AS(parse_config("family\nkind warp\nend\n"), Error);
  CHECK_THROWS_AS(parse_config("seed\n"), Error);
}

TEST_CASE("perturbations land at the requested Hausdorff distance") {
  ConvexBody K = unit_square();
  PerturbationFamily tr;
  tr.kind = FamilyKind::Translate;
  tr.direction = Vec{3.0, 4.0}; // normalized internally
  CHECK(hausdorff_distance(K, apply_perturbation(K, tr, 0.2), 1e-5) ==
        Catch::Approx(0.2).margin(1e-4));

  PerturbationFamily mk;
  mk.kind = FamilyKind::MinkowskiRound;
  CHECK(hausdorff_distance(K, apply_perturbation(K, mk, 0.15), 1e-5) ==
        Catch::Approx(0.15).margin(1e-4));

  PerturbationFamily vj;
  vj.kind = FamilyKind::VertexJitter;
  vj.jitter_seed = 3;
  ConvexBody J = apply_perturbation(K, vj, 0.05);
  CHECK(hausdorff_distance(K, J, 1e-5) <= 0.05 + 1e-4);

  PerturbationFamily cc;
  cc.kind = FamilyKind::CapCut;
  cc.cap_index = 1;
  CapConstruction cons = build_cap_packing(3, 1, 0.2);
  ConvexBody base = base_body(cons);
  double eps = 1.0 - std::cos(0.2);
  CHECK(hausdorff_distance(base, apply_perturbation(base, cc, eps), 1e-4) <=
        eps + 1e-3);
}

TEST_CASE("lemma 4.1 report is trivial for identical bodies") {
  ConvexBody K = unit_square();
  Lemma41Options opts;
  opts.samples = 10000;
  Lemma41Report rep = verify_lemma41(K, K, 0.5, 5, opts);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs == 0.0);
  CHECK(rep.holds);
}

TEST_CASE("lemma 4.1 holds for a small translation") {
  ConvexBody K = unit_square();
  ConvexBody L = K.translated(Vec{0.07, 0.0});
  Lemma41Options opts;
  opts.samples = 20000;
  Lemma41Report rep = verify_lemma41(K, L, 1.0, 6, opts);
  CHECK(rep.lhs > 0.0);
  CHECK(rep.rhs > 0.0);
  CHECK(rep.holds);
  CHECK(rep.sigma > 0.0);
  CHECK(rep.term_sym >= 0.0);
}

TEST_CASE("theorem1 ladder produces shrinking deltas and a sane csv") {
  PerturbationFamily tr;
  tr.kind = FamilyKind::Translate;
  tr.direction = Vec{1.0, 0.0};
  tr.ladder = {0.2, 0.1};
  Theorem1Options opts;
  opts.samples = 20000;
  opts.seed = 3;
  Theorem1Result res = run_theorem1(unit_square(), tr, opts);
  REQUIRE(res.records.size() == 2);
  CHECK(res.records[0].delta > res.records[1].delta);
  CHECK(res.records[0].delta == Catch::Approx(0.2).margin(1e-3));
  for (const auto& rec : res.records) {
    REQUIRE(rec.dbl.size() == 2);
    for (double v : rec.dbl) CHECK(v >= 0.0);
    CHECK(rec.in_fit);
  }
  std::string csv = theorem1_csv(res, tr.kind);
  CHECK(csv.rfind("# supmeas theorem1 v1\n", 0) == 0);
  CHECK(csv.find("family,step,eps,delta,R,i,dbl,mc_stderr,ratio,in_fit,samples,seed")
        != std::string::npos);
  CHECK(csv.find("translate,0,") != std::string::npos);

  // identical reruns give byte-identical csv
  std::string csv2 = theorem1_csv(run_theorem1(unit_square(), tr, opts), tr.kind);
  CHECK(csv == csv2);
}

TEST_CASE("theorem1 rejects non-shrinking ladders") {
  PerturbationFamily tr;
  tr.kind = FamilyKind::Translate;
  tr.direction = Vec{1.0, 0.0};
  tr.ladder = {0.1, 0.1};
  try {
    run_theorem1(unit_square(), tr, Theorem1Options{.samples = 5000});
    FAIL("expected LadderNotShrinking");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LadderNotShrinking);
  }
}

TEST_CASE("grouped d_bL agrees with the direct solver") {
  RngStream rng(501, 0);
  DiscreteMeasure a(SpaceTag::SigmaN, 4), b(SpaceTag::SigmaN, 4);
  for (int t = 0; t < 60; ++t) {
    Vec p(4);
    for (int k = 0; k < 4; ++k) p[k] = rng.uniform(-1.0, 1.0);
    if (t % 2) a.add_atom(p, rng.uniform(0.0, 0.5));
    else b.add_atom(p, rng.uniform(0.0, 0.5));
  }
  detail::GroupedDbl g = detail::grouped_dbl(a, b, 0.25, 4000, 8);
  DblOptions opts;
  opts.grid = 0.25;
  DblResult direct = bounded_lipschitz_distance(a, b, opts);
  CHECK(g.value == Catch::Approx(direct.value).margin(1e-9));
  CHECK(g.coarsening_error == Catch::Approx(direct.coarsening_error).margin(1e-9));
  CHECK(g.stderr_value >= 0.0);
}
