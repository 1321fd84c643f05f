#pragma once

#include <cmath>
#include <cstddef>

namespace klflow {

template <typename Scalar>
struct QuadratureResult {
  Scalar value{};
  Scalar error_estimate{};
  std::size_t evaluations = 0;
  bool converged = true;
};

namespace detail {

template <typename F, typename Scalar>
Scalar adaptive_simpson_step(F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole,
                             Scalar tol, int depth, QuadratureResult<Scalar>& out) {
  const Scalar m = (a + b) / 2;
  const Scalar lm = (a + m) / 2;
  const Scalar rm = (m + b) / 2;
  const Scalar flm = f(lm);
  const Scalar frm = f(rm);
  out.evaluations += 2;
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0) {
    out.converged = false;
    out.error_estimate += std::abs(delta) / 15;
    return left + right + delta / 15;
  }
  if (std::abs(delta) <= 15 * tol) {
    out.error_estimate += std::abs(delta) / 15;
    return left + right + delta / 15;
  }
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, out) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, out);
}

}  // namespace detail

/// Adaptive Simpson quadrature with Richardson correction on each accepted panel.
/// Integrates over [a, b]; b < a gives the negated integral.
template <typename F, typename Scalar>
QuadratureResult<Scalar> adaptive_simpson(F&& f, Scalar a, Scalar b, Scalar abs_tol, int max_depth = 50) {
  QuadratureResult<Scalar> out;
  if (a == b) return out;
  Scalar sign = 1;
  if (b < a) {
    std::swap(a, b);
    sign = -1;
  }
  const Scalar fa = f(a);
  const Scalar fb = f(b);
  const Scalar m = (a + b) / 2;
  const Scalar fm = f(m);
  out.evaluations = 3;
  const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
  out.value = sign * detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, out);
  return out;
}

}  // namespace klflow
