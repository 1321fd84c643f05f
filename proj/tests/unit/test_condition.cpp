#include "klflow/condition.hpp"
#include "klflow/corpus.hpp"

#include <doctest.h>

#include <cmath>

using namespace klflow;

TEST_CASE("alpha of the quadratic is 2 lambda") {
  const auto q1 = make_quadratic(1.0, scalar_point(0.0));
  CHECK(estimate_alpha(q1.functional, scalar_point(1.0), 0.5) == doctest::Approx(2.0).epsilon(1e-12));
  const auto q2 = make_quadratic(2.0, scalar_point(0.0));
  for (double x0 : {-2.0, 0.5, 3.0}) {
    CHECK(estimate_alpha(q2.functional, scalar_point(x0), 1.0) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(*q2.known_alpha(scalar_point(x0), 1.0) == 4.0);
  }
}

TEST_CASE("alpha of the double-well is 2 lambda") {
  for (double lambda : {0.5, 1.0, 3.0}) {
    const auto dw = make_double_well(lambda, 1.0);
    for (double x0 : {0.0, 0.4, 2.5}) {
      CHECK(estimate_alpha(dw.functional, scalar_point(x0), 1.0) == doctest::Approx(2 * lambda).epsilon(1e-9));
    }
  }
}

TEST_CASE("alpha of the truncated parabola") {
  const double x0 = 1.0;
  const auto tp = make_truncated_parabola(x0);
  CHECK(estimate_alpha(tp.functional, scalar_point(x0), x0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(estimate_alpha(tp.functional, scalar_point(x0), 0.5 * x0) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(estimate_alpha(tp.functional, scalar_point(x0), 2 * x0) == 0.0);
  CHECK(*tp.known_alpha(scalar_point(x0), x0) == 4.0);
  CHECK(*tp.known_alpha(scalar_point(x0), 2 * x0) == 0.0);
}

TEST_CASE("alpha of an equilibrium start is flagged") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  const auto est = estimate_alpha_detailed(q.functional, scalar_point(0.0), 1.0);
  CHECK(est.empty_admissible);
  CHECK(std::isinf(est.value));
}

TEST_CASE("condition C on the quadratic holds with equality") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  const auto c = check_condition_C(q.functional, scalar_point(1.0), 1.0, ConditionKind::C);
  CHECK(c.holds);
  CHECK(c.rhs == doctest::Approx(2.0));
  CHECK(c.theta_budget == 0.0);
  const auto cp = check_condition_C(q.functional, scalar_point(1.0), 1.0, ConditionKind::C_prime);
  CHECK_FALSE(cp.holds);
  const auto eq = check_condition_C(q.functional, scalar_point(0.0), 1.0);
  CHECK(eq.holds);
  CHECK(eq.equilibrium_start);
}

TEST_CASE("truncated parabola: C at r = x0, C' never") {
  const double x0 = 1.0;
  const auto tp = make_truncated_parabola(x0);
  CHECK(check_condition_C(tp.functional, scalar_point(x0), x0, ConditionKind::C).holds);
  for (int i = 1; i <= 20; ++i) {
    const double r = 0.15 * i;
    const auto rep = check_condition_C(tp.functional, scalar_point(x0), r, ConditionKind::C_prime);
    CHECK_FALSE(rep.holds);
    if (r > x0) {
      REQUIRE(rep.worst_witness.found);
      CHECK(rep.worst_witness.x(0) < 0);
      CHECK(rep.worst_witness.slope == 0.0);
    }
  }
}

TEST_CASE("double-well from x0 = 3 with r = 2 sits on the boundary of C") {
  const auto dw = make_double_well(1.0, 1.0);
  const auto c = check_condition_C(dw.functional, scalar_point(3.0), 2.0, ConditionKind::C);
  CHECK(c.f0 == 2.0);
  CHECK(c.rhs == doctest::Approx(2.0));
  CHECK(c.alpha_estimate == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c.holds);
  CHECK_FALSE(check_condition_C(dw.functional, scalar_point(3.0), 2.0, ConditionKind::C_prime).holds);
}

TEST_CASE("condition A examples") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  const auto pf = make_alpha_theta(2.0);
  const auto a = check_condition_A(q.functional, pf, scalar_point(1.0), 1.0, ConditionKind::A);
  CHECK(a.holds);
  CHECK(a.theta_budget == 0.0);
  CHECK(a.min_slope_product == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(check_condition_A(q.functional, pf, scalar_point(1.0), 1.0, ConditionKind::A_prime).holds);

  const auto abs = make_power(1.0);
  const auto id = make_power_theta(1.0, 1.0);
  const auto ap = check_condition_A(abs.functional, id, scalar_point(1.0), 1.1, ConditionKind::A_prime);
  CHECK(ap.holds);
  CHECK(ap.theta_budget == doctest::Approx(0.1));
  CHECK(ap.min_slope_product == doctest::Approx(1.0));

  const auto bad = check_condition_A(q.functional, pf, scalar_point(1.0), 0.5, ConditionKind::A);
  CHECK_FALSE(bad.holds);
  CHECK_FALSE(bad.budget_ok);
  CHECK(bad.theta_budget < 0);
}

TEST_CASE("A with the alpha theta agrees with C") {
  struct Case {
    std::string id;
    double x0;
    double r;
  };
  const std::vector<Case> cases{{"quadratic", 1.0, 1.0},          {"quadratic", 1.0, 0.8},
                                {"quadratic", 2.0, 3.0},          {"double-well", 0.0, 1.0},
                                {"double-well", 3.0, 2.0},        {"double-well", 0.5, 0.3},
                                {"truncated-parabola", 1.0, 1.0}, {"truncated-parabola", 1.0, 0.7},
                                {"power?p=2", 1.5, 3.0}};
  for (const auto& cs : cases) {
    CAPTURE(cs.id);
    CAPTURE(cs.x0);
    CAPTURE(cs.r);
    const auto entry = make_corpus_entry(cs.id);
    const auto c = check_condition_C(entry.functional, scalar_point(cs.x0), cs.r, ConditionKind::C);
    REQUIRE(c.alpha_estimate > 0);
    const auto pf = make_alpha_theta(c.alpha_estimate);
    const auto a = check_condition_A(entry.functional, pf, scalar_point(cs.x0), cs.r, ConditionKind::A);
    CHECK(a.holds == c.holds);
  }
}

TEST_CASE("condition checkers reject bad input") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  CHECK_THROWS_AS(check_condition_C(q.functional, scalar_point(1.0), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_C(q.functional, scalar_point(1.0), 1.0, ConditionKind::A), std::invalid_argument);
  CHECK_THROWS_AS(check_condition_A(q.functional, make_alpha_theta(2.0), make_point({1.0, 2.0}), 1.0),
                  std::invalid_argument);
}
