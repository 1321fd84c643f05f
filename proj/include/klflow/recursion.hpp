#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace klflow {

/// Parameters of the recursion f_{k-1} - f_k >= alpha f_k^delta with derived constants.
/// `C` is set for delta > 1, `alpha_bar` and `k0` for delta < 1; the rest are NaN.
template <typename Scalar>
struct BasicRecursiveBoundParams {
  Scalar f0 = 1;
  Scalar alpha = 1;
  Scalar delta_exp = 1;
  Scalar C = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar alpha_bar = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar k0 = std::numeric_limits<Scalar>::quiet_NaN();
};

using RecursiveBoundParams = BasicRecursiveBoundParams<double>;

template <typename Scalar>
struct BasicRecursiveBound {
  Scalar value = 0;
  /// (1+alpha)^{-k} f0 or (1+alpha_bar)^{-k} f0; NaN when delta > 1.
  Scalar geometric = std::numeric_limits<Scalar>::quiet_NaN();
  /// alpha^{1/(1-delta)} 2^{-delta^{-(k-k0)}}; NaN unless delta < 1 and k >= k0.
  Scalar doubly_exponential = std::numeric_limits<Scalar>::quiet_NaN();
  /// (f0^{-(delta-1)} + C k)^{-1/(delta-1)}; NaN unless delta > 1.
  Scalar polynomial = std::numeric_limits<Scalar>::quiet_NaN();
};

using RecursiveBound = BasicRecursiveBound<double>;

/// min(alpha (delta-1) / R, (R^{(delta-1)/delta} - 1) f0^{1-delta}).
template <typename Scalar>
Scalar recursion_constant_objective(Scalar R, Scalar f0, Scalar alpha, Scalar delta) {
  const Scalar c1 = alpha * (delta - 1) / R;
  const Scalar c2 = (std::pow(R, (delta - 1) / delta) - 1) * std::pow(f0, 1 - delta);
  return std::min(c1, c2);
}

/// sup over R in (1, R_max] of the objective above, by golden-section search in log R.
template <typename Scalar>
Scalar recursion_constant(Scalar f0, Scalar alpha, Scalar delta, Scalar R_max = Scalar(1e6),
                          Scalar tol = Scalar(1e-10)) {
  if (!(delta > 1)) throw std::invalid_argument("the constant C is defined for delta > 1");
  auto obj = [&](Scalar s) { return recursion_constant_objective(std::exp(s), f0, alpha, delta); };
  const Scalar inv_phi = (std::sqrt(Scalar(5)) - 1) / 2;
  Scalar a = 0;
  Scalar b = std::log(R_max);
  Scalar x1 = b - inv_phi * (b - a);
  Scalar x2 = a + inv_phi * (b - a);
  Scalar f1 = obj(x1);
  Scalar f2 = obj(x2);
  for (int it = 0; it < 400 && b - a > tol; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = obj(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = obj(x1);
    }
  }
  return obj((a + b) / 2);
}

template <typename Scalar>
BasicRecursiveBoundParams<Scalar> make_recursive_bound_params(Scalar f0, Scalar alpha, Scalar delta) {
  if (!(f0 > 0) || !std::isfinite(f0)) throw std::invalid_argument("recursion needs finite f0 > 0");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw std::invalid_argument("recursion needs finite alpha > 0");
  if (!(delta > 0) || !std::isfinite(delta)) throw std::invalid_argument("recursion needs finite delta > 0");
  BasicRecursiveBoundParams<Scalar> p;
  p.f0 = f0;
  p.alpha = alpha;
  p.delta_exp = delta;
  if (delta > 1) {
    p.C = recursion_constant(f0, alpha, delta);
  } else if (delta < 1) {
    p.alpha_bar = alpha / std::pow(f0, 1 - delta);
    p.k0 = std::log(2 * std::pow(p.alpha_bar, -1 / (1 - delta))) / std::log1p(p.alpha_bar);
  }
  return p;
}

/// Upper bound on f_k for any sequence obeying the recursion. For delta < 1 the value
/// is the smaller of the geometric and (for k >= k0) doubly exponential bounds.
template <typename Scalar>
BasicRecursiveBound<Scalar> recursive_bound(const BasicRecursiveBoundParams<Scalar>& p, Scalar k) {
  if (!(k >= 0)) throw std::invalid_argument("recursion index must be >= 0");
  BasicRecursiveBound<Scalar> out;
  const Scalar delta = p.delta_exp;
  if (delta > 1) {
    out.polynomial = std::pow(std::pow(p.f0, -(delta - 1)) + p.C * k, -1 / (delta - 1));
    out.value = out.polynomial;
    return out;
  }
  if (delta == 1) {
    out.geometric = p.f0 * std::pow(1 + p.alpha, -k);
    out.value = out.geometric;
    return out;
  }
  out.geometric = p.f0 * std::pow(1 + p.alpha_bar, -k);
  out.value = out.geometric;
  if (k >= p.k0) {
    const Scalar log2_exponent = -std::pow(delta, -(k - p.k0));
    out.doubly_exponential = std::pow(p.alpha, 1 / (1 - delta)) * std::exp2(log2_exponent);
    out.value = std::min(out.value, out.doubly_exponential);
  }
  return out;
}

}  // namespace klflow
