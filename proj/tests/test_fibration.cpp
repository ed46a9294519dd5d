#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <isec/fibration.hpp>
#include <isec/generators.hpp>

using namespace isec;

namespace {

SpacePtr square_space() {
  // Two fibers of two points each: {a0, a1} and {b0, b1}.
  std::vector<json> pts{"a0", "a1", "b0", "b1"};
  std::vector<double> d{0, 1, 2, 2, 1, 0, 2, 2, 2, 2, 0, 1, 2, 2, 1, 0};
  return std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix(pts, d));
}

FibrationPtr square_fibration(std::optional<std::vector<double>> measure = {}) {
  return std::make_shared<const Fibration>(Fibration::build(
      square_space(), {json("a"), json("b")}, {0, 0, 1, 1},
      std::move(measure)));
}

}  // namespace

TEST_CASE("partition invariants at construction") {
  auto sp = square_space();
  CHECK_THROWS_AS(
      Fibration::build(sp, {json("a")}, {0, 0, 0}),  // wrong fiber_of length
      InstanceError);
  CHECK_THROWS_AS(Fibration::build(sp, {json("a"), json("b")}, {0, 0, 0, 2}),
                  InstanceError);  // label out of range
  CHECK_THROWS_AS(Fibration::build(sp, {json("a"), json("b")}, {0, 0, 0, 0}),
                  InstanceError);  // empty fiber for b
  CHECK_THROWS_AS(Fibration::build(sp, {json("a"), json("a")}, {0, 0, 1, 1}),
                  InstanceError);  // duplicate label
  CHECK_THROWS_AS(
      Fibration::build(sp, {json("a"), json("b")}, {0, 0, 1, 1},
                       std::vector<double>{1.0}),
      InstanceError);  // measure must cover every label
  CHECK_THROWS_AS(
      Fibration::build(sp, {json("a"), json("b")}, {0, 0, 1, 1},
                       std::vector<double>{1.0, -0.5}),
      InstanceError);  // negative weight
  CHECK_THROWS_AS(Fibration::build(nullptr, {}, {}), ConfigError);
}

TEST_CASE("fiber access and label lookup") {
  auto fib = square_fibration();
  CHECK(fib->label_count() == 2);
  CHECK(fib->fiber(0) == std::vector<PointIndex>{0, 1});
  CHECK(fib->fiber(1) == std::vector<PointIndex>{2, 3});
  CHECK(fib->fiber_of(3) == LabelIndex{1});
  CHECK(fib->find_label(json("b")) == LabelIndex{1});
  CHECK_FALSE(fib->find_label(json("c")).has_value());
  CHECK_THROWS_AS(fib->require_label(json("c")), InstanceError);
}

TEST_CASE("measure accessors") {
  auto bare = square_fibration();
  CHECK_FALSE(bare->has_measure());
  CHECK_THROWS_AS(bare->weight(0), ConfigError);
  CHECK_THROWS_AS(bare->total_mass(), ConfigError);

  auto weighted = square_fibration(std::vector<double>{2.0, 0.5});
  CHECK(weighted->weight(0) == 2.0);
  CHECK(weighted->total_mass() == 2.5);

  auto counted = bare->with_counting_measure();
  CHECK(counted.weight(1) == 1.0);
  CHECK(counted.total_mass() == 2.0);
}

TEST_CASE("fibration documents round-trip") {
  auto fib = square_fibration(std::vector<double>{2.0, 0.5});
  json doc = fib->to_json();
  auto back = Fibration::from_json(fib->space_ptr(), doc);
  CHECK(back.label_count() == 2);
  CHECK(back.fiber(0) == fib->fiber(0));
  CHECK(back.weight(1) == 0.5);
  CHECK(back.to_json().dump() == doc.dump());

  SUBCASE("schema violations") {
    auto sp = square_space();
    json bad = doc;
    bad["fiber_of"].erase("a0");
    CHECK_THROWS_AS(Fibration::from_json(sp, bad), InstanceError);
    bad = doc;
    bad["fiber_of"]["a0"] = "zebra";
    CHECK_THROWS_AS(Fibration::from_json(sp, bad), InstanceError);
    bad = doc;
    bad["measure"]["zebra"] = 1.0;
    CHECK_THROWS_AS(Fibration::from_json(sp, bad), InstanceError);
    bad = doc;
    bad["measure"]["a"] = -1.0;
    CHECK_THROWS_AS(Fibration::from_json(sp, bad), InstanceError);
  }
}

TEST_CASE("sections choose inside their fiber") {
  auto fib = square_fibration();
  auto phi = Section::build(fib, {1, 2});
  CHECK(phi.point_of(0) == PointIndex{1});
  CHECK(phi.graph() == std::vector<PointIndex>{1, 2});

  CHECK_THROWS_AS(Section::build(fib, {1}), InstanceError);
  CHECK_THROWS_AS(Section::build(fib, {1, 7}), InstanceError);
  CHECK_THROWS_AS(Section::build(fib, {2, 3}), InstanceError);  // wrong fiber

  json doc = phi.to_json();
  auto back = Section::from_json(fib, doc);
  CHECK(back.choice() == phi.choice());
  CHECK(back.to_json().dump() == doc.dump());

  json bad = doc;
  bad["choice"].erase("a");
  CHECK_THROWS_AS(Section::from_json(fib, bad), InstanceError);
  bad = doc;
  bad["choice"]["a"] = "b0";
  CHECK_THROWS_AS(Section::from_json(fib, bad), InstanceError);
}

TEST_CASE("pushforward mass counts chosen points") {
  // 9x3 grid with the counting measure; the row-0 section.
  auto g = make_grid(9, 3);
  auto phi = g.identity_row();
  auto ball = g.fib->space().ball(phi.point_of(4), 1.5);
  CHECK(pushforward_mass(phi, ball) == 3.0);  // columns 3, 4, 5

  auto all = phi.graph();
  CHECK(pushforward_mass(phi, all) == 9.0);
  CHECK(pushforward_mass(phi, std::vector<PointIndex>{}) == 0.0);

  // Points of A outside the graph contribute nothing.
  std::vector<PointIndex> off{g.at(0, 1), g.at(0, 2)};
  CHECK(pushforward_mass(phi, off) == 0.0);

  auto bare = make_grid(3, 3, NormKind::Linf, /*counting_measure=*/false);
  CHECK_THROWS_AS(pushforward_mass(bare.identity_row(),
                                   bare.identity_row().graph()),
                  ConfigError);
}

TEST_CASE("fiber diameter bound") {
  CHECK(fiber_diameter_bound(*make_grid(3, 3).fib) == 2.0);
  CHECK(fiber_diameter_bound(*make_grid(9, 2).fib) == 1.0);
  // Singleton fibers.
  CHECK(fiber_diameter_bound(*make_grid(5, 1).fib) == 0.0);

  auto esp = std::make_shared<const FiniteMetricSpace>(
      FiniteMetricSpace::from_matrix_exact(
          {json("a"), json("b")},
          {Rational(0), Rational(3, 2), Rational(3, 2), Rational(0)}));
  auto efib = std::make_shared<const Fibration>(
      Fibration::build(esp, {json(0)}, {0, 0}));
  CHECK(fiber_diameter_bound_exact(*efib) == Rational(3, 2));
}
