#pragma once

// Independent reference computations used by the tests. Nothing here calls into the
// library; each oracle is a plain, slow, obviously-correct procedure.

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace oracle {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

/// Root of a monotone function g on [lo, hi] with g(lo), g(hi) of opposite sign.
inline double bisect(const std::function<double(double)>& g, double lo, double hi, int iterations = 300) {
  double glo = g(lo);
  for (int i = 0; i < iterations; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double gm = g(mid);
    if ((gm < 0) == (glo < 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Argmin of f over an evenly spaced grid on [a, b].
inline std::pair<double, double> grid_argmin(const std::function<double(double)>& f, double a, double b,
                                             int n = 200001) {
  double best_x = a;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * i / (n - 1);
    const double v = f(x);
    if (v < best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

/// All grid local minima whose value is within tol of the global grid minimum.
inline std::vector<double> grid_argmins(const std::function<double(double)>& f, double a, double b, double tol,
                                        int n = 200001) {
  std::vector<double> xs(n);
  std::vector<double> vs(n);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    xs[i] = a + (b - a) * i / (n - 1);
    vs[i] = f(xs[i]);
    best = std::min(best, vs[i]);
  }
  std::vector<double> out;
  for (int i = 1; i + 1 < n; ++i) {
    if (vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1] && vs[i] <= best + tol) out.push_back(xs[i]);
  }
  return out;
}

/// Golden-section maximisation of a unimodal g on [a, b].
inline double golden_max(const std::function<double(double)>& g, double a, double b, int iterations = 500) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - r * (b - a);
  double x2 = a + r * (b - a);
  double g1 = g(x1);
  double g2 = g(x2);
  for (int i = 0; i < iterations && b - a > 1e-15; ++i) {
    if (g1 < g2) {
      a = x1;
      x1 = x2;
      g1 = g2;
      x2 = a + r * (b - a);
      g2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      g2 = g1;
      x1 = b - r * (b - a);
      g1 = g(x1);
    }
  }
  return 0.5 * (a + b);
}

/// Central difference of a scalar function.
inline double derivative(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

/// Descending slope of a one-dimensional f at x by one-sided quotients at step h.
inline double slope_1d(const std::function<double(double)>& f, double x, double h = 1e-7) {
  const double fx = f(x);
  const double down = std::max({0.0, (fx - f(x - h)) / h, (fx - f(x + h)) / h});
  return down;
}

/// Real root of s^3 - s^2 - 1 = 0.
inline double cubic_root() {
  return bisect([](double s) { return s * s * s - s * s - 1; }, 1.0, 2.0);
}

/// Solves u + alpha u^delta = prev for u in [0, prev] by plain bisection on a linear scale.
inline double equality_step(double prev, double alpha, double delta) {
  return bisect([&](double u) { return u + alpha * std::pow(u, delta) - prev; }, 0.0, prev, 2000);
}

}  // namespace oracle
