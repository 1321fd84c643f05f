#include "klflow/parameter_function.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace klflow;

TEST_CASE("power theta evaluates and differentiates") {
  const auto id = make_power_theta(1.0, 1.0);
  CHECK(id(3.0) == 3.0);
  CHECK(id.derivative(3.0) == 1.0);

  const auto sq = make_power_theta(1.0, 0.5);
  CHECK(sq(4.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(sq.derivative(4.0) == doctest::Approx(0.5).epsilon(1e-15));
  const double fd = oracle::derivative([&](double u) { return sq(u); }, 4.0);
  CHECK(sq.derivative(4.0) == doctest::Approx(fd).epsilon(1e-8));
  CHECK(sq(0.0) == 0.0);
}

TEST_CASE("power theta inverse round-trips") {
  const auto pf = make_power_theta(2.0, 0.5);
  CHECK(pf.inverse(4.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (double v : {0.1, 1.0, 4.0, 17.5}) CHECK(pf(pf.inverse(v)) == doctest::Approx(v).epsilon(1e-13));
  CHECK(pf.inverse(0.0) == 0.0);
}

TEST_CASE("power theta rejects bad parameters") {
  CHECK_THROWS_AS(make_power_theta(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_power_theta(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_power_theta(1.0, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(make_alpha_theta(-1.0), std::invalid_argument);
}

TEST_CASE("alpha theta is 2 sqrt(u / alpha)") {
  const auto pf = make_alpha_theta(2.0);
  for (double u : {0.01, 0.5, 3.0}) CHECK(pf(u) == doctest::Approx(2 * std::sqrt(u / 2)).epsilon(1e-14));
}

TEST_CASE("eta closed forms agree with quadrature") {
  CHECK(eta_eval(make_power_theta(0.7, 0.3), 1.0) == 0.0);
  CHECK(eta_eval(make_power_theta(1.0, 0.5), std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(eta_eval(make_power_theta(1.0, 1.0), 3.0) == doctest::Approx(2.0).epsilon(1e-14));

  for (double gamma : {0.25, 0.5, 0.75, 1.0}) {
    const auto pf = make_power_theta(1.3, gamma);
    auto d2 = [&](double s) {
      const double d = 1.3 * std::pow(s, gamma - 1);
      return d * d;
    };
    for (double u : {0.3, 2.0, 5.0}) {
      const double q = u >= 1 ? oracle::simpson(d2, 1.0, u) : -oracle::simpson(d2, u, 1.0);
      CHECK(eta_eval(pf, u) == doctest::Approx(q).epsilon(1e-9));
    }
  }
}

TEST_CASE("eta at zero and infinity") {
  CHECK(std::isinf(eta_eval(make_power_theta(1.0, 0.5), 0.0)));
  CHECK(eta_eval(make_power_theta(1.0, 0.5), 0.0) < 0);
  CHECK(eta_eval(make_power_theta(1.0, 0.75), 0.0) == doctest::Approx(-2.0));
  CHECK(eta_eval(make_power_theta(1.0, 0.25), std::numeric_limits<double>::infinity()) == doctest::Approx(2.0));
  CHECK(std::isinf(eta_eval(make_power_theta(1.0, 0.75), std::numeric_limits<double>::infinity())));
}

TEST_CASE("custom theta falls back to quadrature and bisection") {
  auto custom = make_custom_theta<double>(
      "sqrt", [](double u) { return 2 * std::sqrt(u); }, [](double u) { return 1 / std::sqrt(u); });
  const auto power = make_power_theta(1.0, 0.5);
  for (double u : {0.2, 3.0}) CHECK(eta_eval(custom, u) == doctest::Approx(eta_eval(power, u)).epsilon(1e-8));
  CHECK(custom.inverse(4.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::isinf(eta_eval(custom, 0.0)));

  auto cube = make_custom_theta<double>(
      "u^0.75", [](double u) { return std::pow(u, 0.75) / 0.75; }, [](double u) { return std::pow(u, -0.25); });
  CHECK(eta_eval(cube, 0.0) == doctest::Approx(-2.0).epsilon(1e-6));
}

TEST_CASE("Gamma composes eta with the inverse") {
  const auto id = make_power_theta(1.0, 1.0);
  const auto aux_id = make_auxiliary(id);
  CHECK(gamma_eval(id, aux_id, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

  const auto sq = make_power_theta(1.0, 0.5);
  const auto aux = make_auxiliary(sq);
  CHECK(std::abs(gamma_eval(sq, aux, 2.0)) < 1e-15);
  const double v = 2 * std::sqrt(std::exp(1.0));
  const double u = oracle::bisect([&](double s) { return 2 * std::sqrt(s) - v; }, 0.0, 10.0);
  const double expected = oracle::simpson([](double s) { return 1 / s; }, 1.0, u);
  CHECK(gamma_eval(sq, aux, v) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(aux.gamma(v) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(gamma_eval(sq, aux, -1.0), std::domain_error);
}

TEST_CASE("eta and Gamma inverses") {
  for (double gamma : {0.25, 0.5, 0.75, 1.0}) {
    const auto aux = make_auxiliary(make_power_theta(0.8, gamma));
    for (double u : {0.05, 1.0, 6.0}) {
      CHECK(aux.eta_inverse(aux.eta(u)) == doctest::Approx(u).epsilon(1e-12));
      const double v = aux.pf(u);
      CHECK(aux.gamma_inverse(aux.gamma(v)) == doctest::Approx(v).epsilon(1e-12));
    }
  }
}

TEST_CASE("bisection inverse") {
  const auto id = make_power_theta(1.0, 1.0);
  CHECK(theta_inverse_bisect(id, 5.0, 1e-12) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(theta_inverse_bisect(make_power_theta(1.0, 0.5), 4.0, 1e-12) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(theta_inverse_bisect(make_power_theta(2.0, 1.0), 7.0, 1e-12) == doctest::Approx(3.5).epsilon(1e-12));

  auto bounded = make_custom_theta<double>(
      "atan", [](double u) { return std::atan(u); }, [](double u) { return 1 / (1 + u * u); });
  CHECK_THROWS_AS(theta_inverse_bisect(bounded, 2.0, 1e-12), std::overflow_error);
  CHECK_THROWS_AS(theta_inverse_bisect(id, -1.0, 1e-12), std::domain_error);
}

TEST_CASE("long double instantiation") {
  const auto pf = make_power_theta<long double>(1.0L, 0.5L);
  CHECK(static_cast<double>(pf(4.0L)) == doctest::Approx(4.0));
  CHECK(static_cast<double>(eta_eval(pf, std::exp(1.0L))) == doctest::Approx(1.0));
}
