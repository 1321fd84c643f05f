#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace klflow {

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Point = PointT<double>;

/// Value used for f(x) = +inf. Compares strictly greater than every finite value.
template <typename Scalar = double>
constexpr Scalar infinite_value() noexcept {
  return std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
constexpr bool is_infinite_value(Scalar v) noexcept {
  return v == std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
bool all_finite(const PointT<Scalar>& x) {
  return x.allFinite();
}

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p(i++) = c;
  return p;
}

inline Point scalar_point(double v) {
  Point p(1);
  p(0) = v;
  return p;
}

/// Reference metric backend: Euclidean distance on R^n.
template <typename Scalar>
struct BasicEuclideanSpace {
  Eigen::Index dimension = 1;

  Scalar distance(const PointT<Scalar>& x, const PointT<Scalar>& y) const {
    if (x.size() != dimension || y.size() != dimension) {
      throw std::invalid_argument("point dimension does not match the metric backend");
    }
    return (x - y).norm();
  }
};

using EuclideanSpace = BasicEuclideanSpace<double>;

template <typename Scalar>
Scalar distance(const PointT<Scalar>& x, const PointT<Scalar>& y) {
  return (x - y).norm();
}

/// A functional f: R^n -> [0, inf] given by oracles.
///
/// `value` is mandatory. `analytic_slope` returns the descending slope |df|(x) when it
/// is known in closed form. `smooth_gradient` returns the gradient where f is
/// differentiable and std::nullopt at kinks, jumps and points outside the domain.
template <typename Scalar>
struct BasicFunctional {
  using Vector = PointT<Scalar>;

  std::string label;
  Eigen::Index dimension = 1;
  std::function<Scalar(const Vector&)> value;
  std::function<Scalar(const Vector&)> analytic_slope;
  std::function<std::optional<Vector>(const Vector&)> smooth_gradient;

  Scalar operator()(const Vector& x) const { return value(x); }

  bool has_analytic_slope() const { return static_cast<bool>(analytic_slope); }
  bool has_gradient() const { return static_cast<bool>(smooth_gradient); }

  std::optional<Vector> gradient(const Vector& x) const {
    if (!smooth_gradient) return std::nullopt;
    return smooth_gradient(x);
  }

  BasicEuclideanSpace<Scalar> space() const { return {dimension}; }
};

using Functional = BasicFunctional<double>;

/// Value-only view of f, dropping all derivative oracles. Used to force the sampled
/// estimators on functionals that do have analytic information.
template <typename Scalar>
BasicFunctional<Scalar> value_only(const BasicFunctional<Scalar>& f) {
  BasicFunctional<Scalar> g;
  g.label = f.label + "[value-only]";
  g.dimension = f.dimension;
  g.value = f.value;
  return g;
}

/// Tolerant comparisons shared by the checkers. `a >= b` is accepted when a is within
/// rel * |b| below b.
template <typename Scalar>
bool approx_ge(Scalar a, Scalar b, Scalar rel) {
  if (is_infinite_value(a)) return true;
  return a >= b - rel * std::abs(b);
}

template <typename Scalar>
bool strictly_gt(Scalar a, Scalar b, Scalar rel) {
  if (is_infinite_value(a)) return !is_infinite_value(b);
  return a > b + rel * std::abs(b);
}

}  // namespace klflow
