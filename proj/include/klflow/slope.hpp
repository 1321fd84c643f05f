#pragma once

#include "klflow/core.hpp"
#include "klflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace klflow {

enum class SlopeMethod { analytic, gradient_norm, ball_sampling };

inline const char* to_string(SlopeMethod m) {
  switch (m) {
    case SlopeMethod::analytic: return "analytic";
    case SlopeMethod::gradient_norm: return "gradient-norm";
    case SlopeMethod::ball_sampling: return "ball-sampling";
  }
  return "?";
}

template <typename Scalar>
struct BasicSlopeSchedule {
  std::vector<Scalar> radii{Scalar(1e-2), Scalar(1e-3), Scalar(1e-4), Scalar(1e-5)};
  std::size_t samples_per_radius = 64;
};

using SlopeSchedule = BasicSlopeSchedule<double>;

template <typename Scalar>
struct BasicSlopeEstimate {
  Scalar value = 0;
  Scalar radius_used = 0;
  std::size_t samples = 0;
  SlopeMethod method = SlopeMethod::ball_sampling;
};

using SlopeEstimate = BasicSlopeEstimate<double>;

namespace detail {

template <typename Scalar>
void validate_schedule(const BasicSlopeSchedule<Scalar>& schedule) {
  if (schedule.radii.empty()) throw std::invalid_argument("slope schedule needs at least one radius");
  if (schedule.samples_per_radius == 0) throw std::invalid_argument("slope schedule needs samples");
  for (std::size_t i = 0; i < schedule.radii.size(); ++i) {
    if (!(schedule.radii[i] > 0)) throw std::invalid_argument("slope radii must be positive");
    if (i > 0 && !(schedule.radii[i] < schedule.radii[i - 1])) {
      throw std::invalid_argument("slope radii must be strictly decreasing");
    }
  }
}

template <typename Scalar>
PointT<Scalar> forward_difference_gradient(const BasicFunctional<Scalar>& f, const PointT<Scalar>& x,
                                           Scalar fx, Scalar h) {
  PointT<Scalar> g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    PointT<Scalar> y = x;
    y(i) += h;
    const Scalar fy = f(y);
    g(i) = std::isfinite(fy) ? (fy - fx) / h : Scalar(0);
  }
  return g;
}

}  // namespace detail

/// Ball-sampling surrogate of limsup [f(y) - f(x)]_- / d(y, x): the per-radius maximum
/// quotient, maximised over the two smallest radii of the schedule.
template <typename Scalar>
BasicSlopeEstimate<Scalar> sampled_slope(const BasicFunctional<Scalar>& f, const PointT<Scalar>& x,
                                         const BasicSlopeSchedule<Scalar>& schedule = {}) {
  detail::validate_schedule(schedule);
  BasicSlopeEstimate<Scalar> est;
  est.method = SlopeMethod::ball_sampling;
  const Scalar fx = f(x);
  if (is_infinite_value(fx)) {
    est.value = infinite_value<Scalar>();
    est.radius_used = schedule.radii.back();
    return est;
  }
  auto dirs = unit_directions<Scalar>(x.size(), schedule.samples_per_radius);
  const std::size_t nr = schedule.radii.size();
  const std::size_t first = nr >= 2 ? nr - 2 : 0;
  Scalar best = 0;
  Scalar best_radius = schedule.radii.back();
  for (std::size_t ri = first; ri < nr; ++ri) {
    const Scalar rho = schedule.radii[ri];
    std::vector<PointT<Scalar>> local = dirs;
    if (x.size() >= 3) {
      const PointT<Scalar> g = detail::forward_difference_gradient(f, x, fx, rho);
      if (g.norm() > 0) local.push_back(-g / g.norm());
    }
    for (const auto& d : local) {
      const Scalar fy = f(PointT<Scalar>(x + rho * d));
      ++est.samples;
      if (!std::isfinite(fy)) continue;
      const Scalar q = std::max(Scalar(0), fx - fy) / rho;
      if (q > best) {
        best = q;
        best_radius = rho;
      }
    }
  }
  est.value = best;
  est.radius_used = best_radius;
  return est;
}

/// Descending slope |df|(x). Uses the analytic oracle, then the gradient norm, then
/// ball sampling. f(x) = inf gives +inf.
template <typename Scalar>
BasicSlopeEstimate<Scalar> descending_slope(const BasicFunctional<Scalar>& f, const PointT<Scalar>& x,
                                            const BasicSlopeSchedule<Scalar>& schedule = {}) {
  const Scalar fx = f(x);
  if (is_infinite_value(fx)) {
    BasicSlopeEstimate<Scalar> est;
    est.value = infinite_value<Scalar>();
    est.method = f.has_analytic_slope() ? SlopeMethod::analytic : SlopeMethod::ball_sampling;
    return est;
  }
  if (f.has_analytic_slope()) {
    BasicSlopeEstimate<Scalar> est;
    est.value = f.analytic_slope(x);
    est.method = SlopeMethod::analytic;
    return est;
  }
  if (f.has_gradient()) {
    if (auto g = f.gradient(x)) {
      BasicSlopeEstimate<Scalar> est;
      est.value = g->norm();
      est.method = SlopeMethod::gradient_norm;
      return est;
    }
  }
  return sampled_slope(f, x, schedule);
}

/// Scalar map g with its left derivative, as used by the chain rule.
template <typename Scalar>
struct BasicScalarMap {
  std::function<Scalar(Scalar)> value;
  std::function<Scalar(Scalar)> left_derivative;
};

using ScalarMap = BasicScalarMap<double>;

/// |d(g o f)|(x) = g'_-(f(x)) |df|(x) for non-decreasing g.
template <typename Scalar>
Scalar chain_rule_slope(const BasicFunctional<Scalar>& f, const BasicScalarMap<Scalar>& g,
                        const PointT<Scalar>& x, const BasicSlopeEstimate<Scalar>& slope_f) {
  const Scalar fx = f(x);
  if (!std::isfinite(fx)) throw std::domain_error("chain rule needs f(x) finite");
  if (!g.left_derivative) throw std::domain_error("chain rule needs a left derivative of g");
  const Scalar dg = g.left_derivative(fx);
  if (!std::isfinite(dg) || dg < 0) {
    throw std::domain_error("left derivative of g is undefined or negative at f(x)");
  }
  if (dg == 0) return 0;
  return dg * slope_f.value;
}

/// Value-only composite g o f, mapping f = inf to inf.
template <typename Scalar>
BasicFunctional<Scalar> compose(const BasicScalarMap<Scalar>& g, const BasicFunctional<Scalar>& f,
                                std::string label = {}) {
  BasicFunctional<Scalar> h;
  h.label = label.empty() ? "g o " + f.label : std::move(label);
  h.dimension = f.dimension;
  auto gv = g.value;
  auto fv = f.value;
  h.value = [gv, fv](const PointT<Scalar>& x) {
    const Scalar v = fv(x);
    if (is_infinite_value(v)) return infinite_value<Scalar>();
    return gv(v);
  };
  return h;
}

template <typename Scalar>
struct BasicTimedPoint {
  Scalar t = 0;
  PointT<Scalar> y;
};

using TimedPoint = BasicTimedPoint<double>;

template <typename Scalar>
struct BasicSpeedSample {
  Scalar t = 0;
  Scalar value = 0;
  bool one_sided = false;
};

using SpeedSample = BasicSpeedSample<double>;

/// Metric speed from time-stamped samples (sorted by t). At an interior sample the
/// symmetric quotient over its neighbours is used; between samples, the quotient over
/// the bracketing pair; at either end, a one-sided quotient with `one_sided` set.
template <typename Scalar>
BasicSpeedSample<Scalar> metric_speed(const std::vector<BasicTimedPoint<Scalar>>& points, Scalar t) {
  if (points.size() < 2) throw std::invalid_argument("metric speed needs at least two samples");
  const Scalar t_lo = points.front().t;
  const Scalar t_hi = points.back().t;
  if (t < t_lo || t > t_hi) throw std::domain_error("metric speed: t outside the sampled range");
  BasicSpeedSample<Scalar> out;
  out.t = t;
  auto quotient = [&](std::size_t i, std::size_t j) {
    const Scalar dt = points[j].t - points[i].t;
    if (!(dt > 0)) throw std::invalid_argument("metric speed needs strictly increasing times");
    return distance(points[i].y, points[j].y) / dt;
  };
  const auto it = std::lower_bound(points.begin(), points.end(), t,
                                   [](const BasicTimedPoint<Scalar>& p, Scalar v) { return p.t < v; });
  const auto i = static_cast<std::size_t>(it - points.begin());
  if (i < points.size() && points[i].t == t) {
    if (i == 0) {
      out.value = quotient(0, 1);
      out.one_sided = true;
    } else if (i + 1 == points.size()) {
      out.value = quotient(i - 1, i);
      out.one_sided = true;
    } else {
      out.value = quotient(i - 1, i + 1);
    }
    return out;
  }
  out.value = quotient(i - 1, i);
  return out;
}

}  // namespace klflow
