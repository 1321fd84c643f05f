#pragma once

#include "klflow/core.hpp"
#include "klflow/quadrature.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace klflow {

enum class ThetaFamily { power, custom };

/// Probe used as "infinity" when evaluating theta(inf) = lim theta(u).
template <typename Scalar>
constexpr Scalar theta_overflow_probe() {
  return static_cast<Scalar>(1e300);
}

/// A parameter function theta: [0, inf) -> [0, inf) with theta(0) = 0 and theta' > 0.
///
/// The power family theta(u) = (c / gamma) u^gamma carries closed forms for its
/// derivative and inverse; custom parameter functions may omit the inverse, in which
/// case it is computed by monotone bisection.
template <typename Scalar>
struct BasicParameterFunction {
  ThetaFamily family = ThetaFamily::custom;
  std::string label;
  Scalar c = 0;
  Scalar gamma = 0;
  std::function<Scalar(Scalar)> theta;
  std::function<Scalar(Scalar)> theta_deriv;
  std::function<Scalar(Scalar)> theta_inverse;

  Scalar operator()(Scalar u) const { return u <= 0 ? Scalar(0) : theta(u); }
  Scalar derivative(Scalar u) const { return theta_deriv(u); }

  bool is_power() const { return family == ThetaFamily::power; }
  bool has_closed_inverse() const { return static_cast<bool>(theta_inverse); }

  Scalar at_infinity() const {
    if (is_power()) return std::numeric_limits<Scalar>::infinity();
    return theta(theta_overflow_probe<Scalar>());
  }

  Scalar inverse(Scalar v) const;
};

using ParameterFunction = BasicParameterFunction<double>;

template <typename Scalar>
BasicParameterFunction<Scalar> make_power_theta(Scalar c, Scalar gamma) {
  if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("power theta requires c > 0");
  if (!(gamma > 0) || gamma > 1) throw std::invalid_argument("power theta requires gamma in (0, 1]");
  BasicParameterFunction<Scalar> pf;
  pf.family = ThetaFamily::power;
  pf.c = c;
  pf.gamma = gamma;
  pf.label = "power(c=" + std::to_string(c) + ",gamma=" + std::to_string(gamma) + ")";
  pf.theta = [c, gamma](Scalar u) { return c / gamma * std::pow(u, gamma); };
  pf.theta_deriv = [c, gamma](Scalar u) {
    if (gamma == 1) return c;
    return c * std::pow(u, gamma - 1);
  };
  pf.theta_inverse = [c, gamma](Scalar v) {
    if (v <= 0) return Scalar(0);
    return std::pow(gamma * v / c, 1 / gamma);
  };
  return pf;
}

/// theta(u) = 2 sqrt(u / alpha), the parameter function matching the
/// Polyak-Lojasiewicz-type condition with constant alpha.
template <typename Scalar>
BasicParameterFunction<Scalar> make_alpha_theta(Scalar alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha theta requires a finite alpha > 0");
  }
  auto pf = make_power_theta<Scalar>(1 / std::sqrt(alpha), Scalar(0.5));
  pf.label = "alpha(" + std::to_string(alpha) + ")";
  return pf;
}

template <typename Scalar>
BasicParameterFunction<Scalar> make_custom_theta(std::string label, std::function<Scalar(Scalar)> theta,
                                                 std::function<Scalar(Scalar)> theta_deriv,
                                                 std::function<Scalar(Scalar)> theta_inverse = {}) {
  if (!theta || !theta_deriv) throw std::invalid_argument("custom theta needs value and derivative");
  BasicParameterFunction<Scalar> pf;
  pf.family = ThetaFamily::custom;
  pf.label = std::move(label);
  pf.theta = std::move(theta);
  pf.theta_deriv = std::move(theta_deriv);
  pf.theta_inverse = std::move(theta_inverse);
  return pf;
}

/// Solves theta(u) = v by bisection on an automatically expanded bracket.
/// Throws std::overflow_error when the bracket would pass the overflow probe.
template <typename Scalar>
Scalar theta_inverse_bisect(const BasicParameterFunction<Scalar>& pf, Scalar v, Scalar tol) {
  if (!(v >= 0)) throw std::domain_error("theta inverse needs v >= 0");
  if (!(tol > 0)) throw std::invalid_argument("theta inverse needs tol > 0");
  if (v == 0) return 0;
  Scalar lo = 0;
  Scalar hi = 1;
  while (pf(hi) < v) {
    lo = hi;
    hi *= 2;
    if (hi > theta_overflow_probe<Scalar>()) {
      throw std::overflow_error("theta inverse: value outside the range of theta");
    }
  }
  for (int it = 0; it < 4000; ++it) {
    const Scalar mid = lo + (hi - lo) / 2;
    const Scalar tm = pf(mid);
    if (std::abs(tm - v) <= tol) return mid;
    if (mid <= lo || mid >= hi) return mid;
    if (tm < v) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

template <typename Scalar>
Scalar BasicParameterFunction<Scalar>::inverse(Scalar v) const {
  if (!(v >= 0)) throw std::domain_error("theta inverse needs v >= 0");
  if (theta_inverse) return theta_inverse(v);
  if (!(v < at_infinity())) throw std::domain_error("value outside the range of theta");
  const Scalar tol = std::numeric_limits<Scalar>::epsilon() * 16 * std::max(Scalar(1), v);
  return theta_inverse_bisect(*this, v, tol);
}

namespace detail {

template <typename Scalar>
Scalar integrate_theta_deriv_sq(const BasicParameterFunction<Scalar>& pf, Scalar a, Scalar b) {
  auto integrand = [&pf](Scalar s) {
    const Scalar d = pf.derivative(s);
    return d * d;
  };
  return adaptive_simpson(integrand, a, b, Scalar(1e-10)).value;
}

// eta(0) = -int_0^1 theta'^2. The tail over [2^-(k+1), 2^-k] is summed while its
// increments shrink geometrically; a non-contracting ratio means divergence.
template <typename Scalar>
Scalar eta_at_zero_by_quadrature(const BasicParameterFunction<Scalar>& pf) {
  Scalar total = 0;
  Scalar prev_inc = 0;
  Scalar hi = 1;
  for (int k = 0; k < 80; ++k) {
    const Scalar lo = hi / 2;
    const Scalar inc = integrate_theta_deriv_sq(pf, lo, hi);
    if (!std::isfinite(inc)) return -std::numeric_limits<Scalar>::infinity();
    total += inc;
    if (k >= 8 && prev_inc > 0) {
      const Scalar q = inc / prev_inc;
      if (q >= Scalar(1) - Scalar(1e-6)) return -std::numeric_limits<Scalar>::infinity();
      const Scalar tail = inc * q / (1 - q);
      if (tail <= Scalar(1e-12) * std::max(Scalar(1), total)) return -(total + tail);
    }
    prev_inc = inc;
    hi = lo;
  }
  return -std::numeric_limits<Scalar>::infinity();
}

}  // namespace detail

/// eta(u) = int_1^u theta'(s)^2 ds. Closed form for the power family, adaptive
/// Simpson otherwise. eta(0) may be -inf and is returned as such.
template <typename Scalar>
Scalar eta_eval(const BasicParameterFunction<Scalar>& pf, Scalar u) {
  if (!(u >= 0)) throw std::domain_error("eta needs u >= 0");
  if (std::isinf(u)) {
    if (pf.is_power() && pf.gamma < Scalar(0.5)) return pf.c * pf.c / (1 - 2 * pf.gamma);
    return std::numeric_limits<Scalar>::infinity();
  }
  if (pf.is_power()) {
    const Scalar c2 = pf.c * pf.c;
    const Scalar e = 2 * pf.gamma - 1;
    if (e == 0) return u == 0 ? -std::numeric_limits<Scalar>::infinity() : c2 * std::log(u);
    if (u == 0) return e > 0 ? -c2 / e : -std::numeric_limits<Scalar>::infinity();
    return c2 / e * (std::pow(u, e) - 1);
  }
  if (u == 1) return 0;
  if (u == 0) return detail::eta_at_zero_by_quadrature(pf);
  return detail::integrate_theta_deriv_sq(pf, Scalar(1), u);
}

/// eta, Gamma = eta o theta^{-1}, and their inverses for a fixed parameter function.
template <typename Scalar>
struct BasicAuxiliaryFunctions {
  BasicParameterFunction<Scalar> pf;
  bool eta_closed_form = false;

  Scalar eta(Scalar u) const { return eta_eval(pf, u); }

  Scalar gamma(Scalar v) const {
    if (!(v >= 0) || !(v < pf.at_infinity())) {
      throw std::domain_error("Gamma is defined on [0, theta(inf))");
    }
    return eta(pf.inverse(v));
  }

  /// Smallest u >= 0 with eta(u) >= w; 0 when w <= eta(0), +inf when w >= eta(inf).
  Scalar eta_inverse(Scalar w) const {
    constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
    if (w == -inf) return 0;
    if (pf.is_power()) {
      const Scalar c2 = pf.c * pf.c;
      const Scalar e = 2 * pf.gamma - 1;
      if (e == 0) return std::exp(w / c2);
      const Scalar base = 1 + e * w / c2;
      if (base <= 0) return e > 0 ? Scalar(0) : inf;
      return std::pow(base, 1 / e);
    }
    if (w <= eta(Scalar(0))) return 0;
    Scalar lo = 0;
    Scalar hi = 1;
    while (eta(hi) < w) {
      lo = hi;
      hi *= 2;
      if (hi > theta_overflow_probe<Scalar>()) return inf;
    }
    for (int it = 0; it < 200 && hi - lo > std::numeric_limits<Scalar>::epsilon() * hi; ++it) {
      const Scalar mid = lo + (hi - lo) / 2;
      if (eta(mid) < w) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return hi;
  }

  Scalar gamma_inverse(Scalar w) const {
    const Scalar u = eta_inverse(w);
    if (std::isinf(u)) return pf.at_infinity();
    return pf(u);
  }
};

using AuxiliaryFunctions = BasicAuxiliaryFunctions<double>;

template <typename Scalar>
BasicAuxiliaryFunctions<Scalar> make_auxiliary(const BasicParameterFunction<Scalar>& pf) {
  return {pf, pf.is_power()};
}

template <typename Scalar>
Scalar gamma_eval(const BasicParameterFunction<Scalar>& pf, const BasicAuxiliaryFunctions<Scalar>& aux,
                  Scalar v) {
  if (!(v >= 0) || !(v < pf.at_infinity())) {
    throw std::domain_error("Gamma is defined on [0, theta(inf))");
  }
  return aux.eta(pf.inverse(v));
}

}  // namespace klflow
