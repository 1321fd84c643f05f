#include "klflow/condition.hpp"
#include "klflow/corpus.hpp"
#include "klflow/slope.hpp"

#include <doctest.h>

#include <cmath>

using namespace klflow;

namespace {

std::vector<double> probe_points(const CorpusEntry& e, double lo, double hi) {
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) {
    const double x = lo + (hi - lo) * (i + 0.37) / 100;
    bool near = false;
    for (double s : e.singular_points) near = near || std::abs(x - s) < 1e-3;
    if (!near) xs.push_back(x);
  }
  return xs;
}

}  // namespace

TEST_CASE("quadratic entry") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  CHECK(q.functional(scalar_point(2.0)) == 2.0);
  CHECK(q.functional.analytic_slope(scalar_point(2.0)) == 2.0);
  CHECK(q.resolvent(scalar_point(1.0), 1.0).front()(0) == 0.5);
  CHECK(*make_quadratic(2.0, scalar_point(0.0)).known_alpha(scalar_point(1.0), 1.0) == 4.0);
  const auto y = q.trajectory(scalar_point(1.0), 1.0, BranchPolicy::positive_branch);
  CHECK((*y)(0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("double-well entry") {
  const auto dw = make_double_well(1.0, 1.0);
  CHECK(dw.functional(scalar_point(0.0)) == 0.5);
  CHECK(dw.functional.analytic_slope(scalar_point(0.0)) == 1.0);
  for (double x : {-2.5, -1.0, -0.2, 0.7, 1.0, 3.0}) {
    CHECK(dw.functional.analytic_slope(scalar_point(x)) == doctest::Approx(std::abs(std::abs(x) - 1)));
  }
  CHECK(*dw.known_alpha(scalar_point(0.3), 1.0) == 2.0);
  CHECK(dw.resolvent(scalar_point(0.0), 1.0).size() == 2);
}

TEST_CASE("double-well condition A needs r >= min(|x0 - a|, |x0 + a|)") {
  const auto dw = make_double_well(1.0, 1.0);
  const Point x0 = scalar_point(0.4);
  const auto pf = *dw.matched_theta(x0);
  const double need = std::min(std::abs(0.4 - 1), std::abs(0.4 + 1));
  CHECK(pf(dw.functional(x0)) == doctest::Approx(need).epsilon(1e-12));
}

TEST_CASE("truncated parabola entry") {
  const auto tp = make_truncated_parabola(1.0);
  CHECK(tp.functional.analytic_slope(scalar_point(-1.0)) == 0.0);
  CHECK(tp.functional(scalar_point(-1.0)) == 0.5);
  CHECK(tp.functional.analytic_slope(scalar_point(0.5)) == 1.0);
  CHECK(*tp.known_alpha(scalar_point(1.0), 1.0) == 4.0);
  CHECK(*tp.known_alpha(scalar_point(1.0), 2.0) == 0.0);
}

TEST_CASE("staircase entry") {
  const auto st = make_staircase(1.0, 0.1);
  CHECK(st.functional(scalar_point(2.0)) == doctest::Approx(2.1));
  CHECK(st.functional(scalar_point(1.0)) == 1.0);
  CHECK(st.functional.analytic_slope(scalar_point(0.5)) == 1.0);
  CHECK((*st.trajectory(scalar_point(2.0), 3.0, BranchPolicy::positive_branch))(0) == 0.0);
  CHECK((*st.trajectory(scalar_point(2.0), 1.0, BranchPolicy::positive_branch))(0) == 1.0);
  const auto pf = *st.matched_theta(scalar_point(2.0));
  CHECK(pf(2.1) == doctest::Approx(2 * std::sqrt(2.1 * 2.1)).epsilon(1e-12));
}

TEST_CASE("asymmetric double-well entry") {
  const auto e = make_asymmetric_double_well(1.0, 1.0, 0.1);
  CHECK(e.functional(scalar_point(1.0)) == 0.1);
  CHECK(e.functional.analytic_slope(scalar_point(1.0)) == 0.0);
  CHECK(e.functional(scalar_point(-1.0)) == 0.0);
  CHECK(estimate_alpha(e.functional, scalar_point(-0.05), 1.0) == 0.0);
  CHECK_THROWS_AS(make_asymmetric_double_well(1.0, 1.0, 0.6), std::invalid_argument);
}

TEST_CASE("sharpness entry") {
  const auto e = make_sharpness(1.0, 0.5, 10.0, 0.1);
  const auto pf = make_power_theta(1.0, 0.5);
  CHECK(e.functional(scalar_point(2.0)) == doctest::Approx(pf.inverse(2.1)).epsilon(1e-14));
  CHECK(is_infinite_value(e.functional(scalar_point(-0.5))));
  CHECK(e.functional(scalar_point(11.0)) == 0.0);
}

TEST_CASE("analytic slopes match the estimator within 2 percent") {
  for (const auto& item : list_corpus()) {
    CAPTURE(item.id);
    const auto e = make_corpus_entry(item.id);
    REQUIRE(e.functional.has_analytic_slope());
    const auto sampled = value_only(e.functional);
    for (double x : probe_points(e, -2.7, 3.1)) {
      const Point p = scalar_point(x);
      const double fx = e.functional(p);
      if (!std::isfinite(fx)) continue;
      const double exact = e.functional.analytic_slope(p);
      const double est = descending_slope(sampled, p).value;
      CAPTURE(x);
      CHECK(est == doctest::Approx(exact).epsilon(0.02).scale(1e-9));
    }
  }
}

TEST_CASE("registry ids") {
  const auto id = parse_corpus_id("double-well?lambda=2&a=0.5");
  CHECK(id.name == "double-well");
  CHECK(id.params.at("lambda") == "2");
  CHECK(id.params.at("a") == "0.5");
  const auto e = make_corpus_entry("double-well?lambda=2&a=0.5");
  CHECK(e.functional(scalar_point(0.0)) == doctest::Approx(0.25));
  CHECK_THROWS_AS(make_corpus_entry("nope"), std::invalid_argument);
  CHECK_THROWS_AS(make_corpus_entry("quadratic?mu=1"), std::invalid_argument);
  CHECK_THROWS_AS(make_corpus_entry("quadratic?lambda=abc"), std::invalid_argument);
  CHECK_THROWS_AS(make_corpus_entry("power?p=0.5"), std::invalid_argument);
  CHECK(list_corpus().size() >= 7);
  for (const auto& item : list_corpus()) CHECK_FALSE(item.provenance.empty());
}

TEST_CASE("brute-force minimiser") {
  const auto q = make_quadratic(1.0, scalar_point(0.0));
  const auto r1 = brute_force_minimiser(q.functional, -2, 2, 20001, scalar_point(1.0));
  CHECK(std::abs(r1.point(0)) <= 1e-6);
  CHECK(r1.value <= 1e-12);
  CHECK_FALSE(r1.inconclusive);

  const auto dw = make_double_well(1.0, 1.0);
  const auto r2 = brute_force_minimiser(dw.functional, -2, 2, 20001, scalar_point(0.3));
  CHECK(r2.minimisers.size() == 2);
  CHECK(r2.point(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r2.value <= 1e-12);

  const auto st = make_staircase(1.0, 0.1);
  const auto r3 = brute_force_minimiser(st.functional, -1, 3, 20001, scalar_point(2.0));
  CHECK(std::abs(r3.point(0)) <= 1e-6);
  CHECK(r3.value <= 1e-12);

  const auto r4 = brute_force_minimiser(q.functional, 1, 3, 2001, scalar_point(2.0));
  CHECK(r4.inconclusive);
}
