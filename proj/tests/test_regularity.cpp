#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include <isec/generators.hpp>
#include <isec/regularity.hpp>

using namespace isec;

namespace {

// Two-point fiber whose members see different label sets: around a1 the
// radius-2 ball projects onto {A, B} (mass 2), around a2 onto {A, C}
// (mass 3), so the homogeneity constant is 3/2.
FibrationPtr lopsided_fibration() {
  std::vector<json> pts{"a1", "a2", "b", "c"};
  std::vector<double> d{0, 2, 1, 3,  //
                        2, 0, 3, 1,  //
                        1, 3, 0, 4,  //
                        3, 1, 4, 0};
  auto sp = std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(pts, d));
  return std::make_shared<const Fibration>(
      Fibration::build(sp, {json("A"), json("B"), json("C")}, {0, 0, 1, 2},
                       std::vector<double>{1.0, 1.0, 2.0}));
}

// Zero-weight fiber {a, b} next to a weighted singleton {c}: the projected
// 1.5-ball around a has mass 0 while the one around b has mass 1.
FibrationPtr dead_zone_fibration() {
  std::vector<json> pts{"a", "b", "c"};
  std::vector<double> d{0, 2, 3, 2, 0, 1, 3, 1, 0};
  auto sp = std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(pts, d));
  return std::make_shared<const Fibration>(
      Fibration::build(sp, {json(0), json(1)}, {0, 0, 1},
                       std::vector<double>{0.0, 1.0}));
}

}  // namespace

TEST_CASE("projected mass sums the labels a set touches") {
  auto g = make_grid(3, 3);
  std::vector<PointIndex> same_col{g.at(0, 0), g.at(0, 1)};
  CHECK(projected_mass(*g.fib, same_col) == 1.0);
  std::vector<PointIndex> two_cols{g.at(0, 0), g.at(1, 2)};
  CHECK(projected_mass(*g.fib, two_cols) == 2.0);
  CHECK(projected_mass(*g.fib, std::vector<PointIndex>{}) == 0.0);

  auto bare = make_grid(3, 3, NormKind::Linf, /*counting_measure=*/false);
  CHECK_THROWS_AS(projected_mass(*bare.fib, two_cols), ConfigError);
}

TEST_CASE("homogeneity constant") {
  SUBCASE("grid fibers are exchangeable") {
    auto g = make_grid(9, 3);
    std::vector<double> radii{2.0, 3.0, 4.0};
    auto res = homogeneity_constant(*g.fib, 1.0, radii);
    CHECK(res.feasible);
    CHECK(res.C == 1.0);
  }
  SUBCASE("asymmetric neighbourhoods push C above 1") {
    std::vector<double> radii{2.0};
    auto res = homogeneity_constant(*lopsided_fibration(), 1.0, radii);
    CHECK(res.feasible);
    CHECK(res.C == 1.5);
    REQUIRE(res.witness_r.has_value());
    CHECK(*res.witness_r == 2.0);
    CHECK(res.witness_mass_x == 3.0);
    CHECK(res.witness_mass_x_prime == 2.0);
  }
  SUBCASE("a dead projected ball is infeasible") {
    std::vector<double> radii{1.5};
    auto res = homogeneity_constant(*dead_zone_fibration(), 1.0, radii);
    CHECK_FALSE(res.feasible);
    REQUIRE(res.witness_x.has_value());
    const bool x_dead = res.witness_mass_x == 0.0;
    const bool xp_dead = res.witness_mass_x_prime == 0.0;
    CHECK(x_dead != xp_dead);
  }
  SUBCASE("singleton fibers compare nothing") {
    auto g = make_grid(4, 1);
    std::vector<double> radii{2.0};
    auto res = homogeneity_constant(*g.fib, 1.0, radii);
    CHECK(res.feasible);
    CHECK(res.C == 1.0);
    CHECK_FALSE(res.witness_x.has_value());
  }
  SUBCASE("radius grid validation") {
    auto g = make_grid(3, 3);
    std::vector<double> radii{2.0};
    CHECK_THROWS_AS(homogeneity_constant(*g.fib, 0.0, radii), DomainError);
    CHECK_THROWS_AS(homogeneity_constant(*g.fib, 1.0, {}), DomainError);
    std::vector<double> low{0.5};
    CHECK_THROWS_AS(homogeneity_constant(*g.fib, 1.0, low), DomainError);
  }
}

TEST_CASE("open-ball inclusions around the graph") {
  std::vector<double> radii{1.0, 2.0, 3.0};

  auto g = make_grid(9, 3);
  auto rep = ball_inclusion_check(g.identity_row(), {1, 0}, radii);
  CHECK(rep.ok);
  CHECK_FALSE(rep.failure.has_value());
  CHECK(rep.comparisons == 9 * 3 * 9 * 2);  // centre * radius * label * side

  auto h = make_grid(5, 3);
  auto zrep = ball_inclusion_check(h.zigzag(), tight_constants(h.zigzag()),
                                   radii);
  CHECK(zrep.ok);

  // The declared constants must actually hold.
  CHECK_THROWS_AS(ball_inclusion_check(g.zigzag(), {1, 0}, radii),
                  PreconditionError);
}

TEST_CASE("mass-growth estimate along the graph") {
  auto g = make_grid(9, 3);
  auto id = g.identity_row();

  std::vector<double> radii{2.0, 3.0, 4.0};
  auto est = ad_regularity_estimate(id, 1.0, 1.0, radii);
  CHECK(est.positive);
  CHECK(est.c1 == 1.0);    // interior columns grow exactly like r
  CHECK(est.c2 == 1.75);   // edge column at r = 4: mass 7 over radius 4
  REQUIRE(est.best_fit_Q.has_value());

  std::vector<double> wider{2.0, 3.0, 4.0, 5.0};
  auto est5 = ad_regularity_estimate(id, 1.0, 1.0, wider);
  CHECK(est5.c2 == 1.8);
  CHECK(*est5.best_fit_Q == doctest::Approx(0.9709685896271867).epsilon(1e-12));

  CHECK_THROWS_AS(ad_regularity_estimate(id, 0.0, 1.0, radii), DomainError);

  SUBCASE("zero mass is witnessed, not smoothed over") {
    auto fib = dead_zone_fibration();
    auto phi = Section::build(fib, {0, 2});  // label 0 -> a
    std::vector<double> r{1.5};
    auto dead = ad_regularity_estimate(phi, 1.0, 1.0, r);
    CHECK_FALSE(dead.positive);
    CHECK(dead.c1 == 0.0);
    REQUIRE(dead.zero_witness_y.has_value());
    CHECK(*dead.zero_witness_y == 0);
    CHECK(*dead.zero_witness_r == 1.5);
  }
}

TEST_CASE("source bundle") {
  auto g = make_grid(9, 3);
  std::vector<double> radii{2.0, 3.0, 4.0, 5.0};
  auto src = source_regularity(g.identity_row(), 1.0, 1.0, radii);
  CHECK(src.feasible);
  CHECK(src.C == 1.0);
  CHECK(src.c1 == 1.0);
  CHECK(src.c2 == 1.8);
  CHECK(src.Q == 1.0);
  CHECK(src.r0 == 1.0);
}

TEST_CASE("mass sandwich transfer") {
  auto g = make_grid(9, 3);
  auto id = g.identity_row();
  auto zig = g.zigzag();
  std::vector<double> radii{2.0, 3.0, 4.0, 5.0};

  SUBCASE("self-transfer is tight and survives the tolerance") {
    auto rep = transfer_regularity(id, id, {1, 0}, 1.0, 1.0, radii);
    CHECK(rep.all_ok);
    CHECK(rep.vacuous_count == 0);
    CHECK(rep.c3 == 1.0);
    CHECK(rep.c4 == 1.8);
    CHECK(rep.checks.size() == 9 * 4);
    // Label-major, radius-minor.
    CHECK(rep.checks[0].y == 0);
    CHECK(rep.checks[1].r == 3.0);
    CHECK(rep.checks[4].y == 1);
  }

  SUBCASE("zigzag against the row section") {
    auto rep = transfer_regularity(zig, id, {2, 0}, 1.0, 1.0, radii);
    CHECK(rep.all_ok);
    CHECK(rep.c3 == 0.5);
    CHECK(rep.c4 == doctest::Approx(3.6));
    // With C = 1 the product of the transferred constants reproduces the
    // source product up to rounding.
    CHECK(rep.c3 * rep.c4 ==
          doctest::Approx(rep.source.c1 * rep.source.c2));
  }

  SUBCASE("worked constants, assembled by hand") {
    SourceRegularity src;
    src.Q = 1.0;
    src.r0 = 1.0;
    src.C = 1.0;
    src.c1 = 1.0;
    src.c2 = 1.0;
    src.feasible = true;
    auto rep = transfer_regularity(zig, src, {2, 0}, radii);
    CHECK(rep.c3 == 0.5);
    CHECK(rep.c4 == 2.0);
  }

  SUBCASE("radii at or below M carry no lower bound") {
    std::vector<double> rr{2.0, 3.0};
    auto rep = transfer_regularity(zig, id, {2, 2}, 1.0, 1.0, rr);
    CHECK(rep.vacuous_count == 9);  // r = 2 for every label
    for (const auto& chk : rep.checks) {
      CHECK(chk.vacuous == (chk.r <= 2.0));
      if (chk.vacuous) CHECK(chk.lower == 0.0);
    }
    CHECK(rep.all_ok);  // uppers still bind everywhere
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(transfer_regularity(zig, id, {1, 0}, 1.0, 1.0, radii),
                    PreconditionError);  // zigzag is not (1,0)-QI

    SourceRegularity bad;
    bad.Q = 1.0;
    bad.r0 = 1.0;
    bad.feasible = false;
    CHECK_THROWS_AS(transfer_regularity(zig, bad, {2, 0}, radii),
                    PreconditionError);

    auto other = make_grid(9, 3);
    CHECK_THROWS_AS(transfer_regularity(other.zigzag(), id, {2, 0}, 1.0, 1.0,
                                        radii),
                    PreconditionError);

    auto bare = make_grid(9, 3, NormKind::Linf, /*counting_measure=*/false);
    CHECK_THROWS_AS(transfer_regularity(bare.identity_row(),
                                        bare.identity_row(), {1, 0}, 1.0,
                                        1.0, radii),
                    ConfigError);
  }
}

TEST_CASE("pushforward of a section is projection intersected with its graph") {
  auto g = make_grid(9, 3);
  auto zig = g.zigzag();
  auto graph = zig.graph();
  for (PointIndex p = 0; p < g.fib->space().size(); ++p) {
    for (double r : {1.0, 1.5, 2.5}) {
      auto ball = g.fib->space().ball(p, r);
      std::vector<PointIndex> meet;
      std::set_intersection(ball.begin(), ball.end(), graph.begin(),
                            graph.end(), std::back_inserter(meet));
      CHECK(pushforward_mass(zig, ball) == projected_mass(*g.fib, meet));
    }
  }
}

TEST_CASE("self-transfer holds on any instance") {
  // With psi = phi and M = 0 the sandwich weakens the defining
  // inequalities of c1 and c2 (c3 <= c1 and c4 >= c2 whenever L >= 1 and
  // C >= 1), so it must hold on every feasible instance regardless of the
  // metric's shape.
  Rng rng(271828);
  std::vector<double> radii{1.5, 2.0, 3.0};
  for (int trial = 0; trial < 15; ++trial) {
    auto fib = random_fibration(rng);
    auto phi = random_section(fib, rng);
    // Distances live in [1, 2], so r0 = 1 qualifies every radius above it.
    auto src = source_regularity(phi, 1.0, 1.0, radii);
    REQUIRE(src.feasible);  // counting measure: balls are never dead
    CHECK(src.c1 <= src.c2);
    auto rep = transfer_regularity(phi, src, tight_constants(phi), radii);
    CHECK(rep.all_ok);
    CHECK(rep.vacuous_count == 0);
    CHECK(rep.checks.size() == fib->label_count() * radii.size());
  }
}
