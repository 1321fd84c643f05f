#include "klflow/flow.hpp"

#include "klflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klflow {

const char* to_string(BranchPolicy policy) {
  switch (policy) {
    case BranchPolicy::positive_branch: return "positive-branch";
    case BranchPolicy::negative_branch: return "negative-branch";
    case BranchPolicy::lexicographic: return "lexicographic";
  }
  return "?";
}

BranchPolicy branch_policy_from_string(const std::string& name) {
  if (name == "positive-branch" || name == "positive") return BranchPolicy::positive_branch;
  if (name == "negative-branch" || name == "negative") return BranchPolicy::negative_branch;
  if (name == "lexicographic") return BranchPolicy::lexicographic;
  throw std::invalid_argument("unknown branch policy: " + name);
}

const char* to_string(FlowStop stop) {
  switch (stop) {
    case FlowStop::horizon: return "horizon";
    case FlowStop::extinction: return "extinction";
    case FlowStop::equilibrium: return "equilibrium";
    case FlowStop::step_underflow: return "step-underflow";
    case FlowStop::sample_limit: return "sample-limit";
  }
  return "?";
}

Point Trajectory::state_at(double t) const {
  if (samples.empty()) throw std::logic_error("empty trajectory");
  if (t <= samples.front().t) return samples.front().y;
  if (t >= samples.back().t) return samples.back().y;
  const auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const TrajectorySample& s, double v) { return s.t < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (hi.t == t) return hi.y;
  const double w = (t - lo.t) / (hi.t - lo.t);
  return (1 - w) * lo.y + w * hi.y;
}

double Trajectory::value_at(double t) const {
  if (samples.empty()) throw std::logic_error("empty trajectory");
  if (t <= samples.front().t) return samples.front().f;
  if (t >= samples.back().t) return samples.back().f;
  const auto it = std::lower_bound(samples.begin(), samples.end(), t,
                                   [](const TrajectorySample& s, double v) { return s.t < v; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  if (hi.t == t) return hi.f;
  const double w = (t - lo.t) / (hi.t - lo.t);
  return (1 - w) * lo.f + w * hi.f;
}

namespace {

std::optional<Point> finite_gradient(const Functional& f, const Point& y) {
  if (!f.has_gradient()) return std::nullopt;
  auto g = f.gradient(y);
  if (!g || !g->allFinite()) return std::nullopt;
  return g;
}

bool lexicographically_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

bool preferred(const Point& a, const Point& b, BranchPolicy policy) {
  const double sa = a.sum();
  const double sb = b.sum();
  switch (policy) {
    case BranchPolicy::positive_branch:
      if (sa != sb) return sa > sb;
      break;
    case BranchPolicy::negative_branch:
      if (sa != sb) return sa < sb;
      break;
    case BranchPolicy::lexicographic: break;
  }
  return lexicographically_less(a, b);
}

struct SampledVelocity {
  Point v;
  bool equilibrium = false;
};

// Steepest descent direction by directional sampling on the two smallest radii;
// near-ties are resolved by the branch policy.
SampledVelocity sampled_velocity(const Functional& f, const Point& y, double fy, const FlowControls& c) {
  const auto& radii = c.schedule.radii;
  const std::size_t nr = radii.size();
  const std::size_t first = nr >= 2 ? nr - 2 : 0;
  auto dirs = unit_directions<double>(y.size(), c.schedule.samples_per_radius);
  if (y.size() >= 2) {
    Point g(y.size());
    const double h = radii.back();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      Point z = y;
      z(i) += h;
      const double fz = f(z);
      g(i) = std::isfinite(fz) ? (fz - fy) / h : 0.0;
    }
    if (g.norm() > 0) dirs.push_back(-g / g.norm());
  }
  std::vector<double> q(dirs.size(), 0.0);
  double best = 0;
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    for (std::size_t ri = first; ri < nr; ++ri) {
      const double rho = radii[ri];
      const double fz = f(Point(y + rho * dirs[k]));
      if (!std::isfinite(fz)) continue;
      q[k] = std::max(q[k], std::max(0.0, fy - fz) / rho);
    }
    best = std::max(best, q[k]);
  }
  SampledVelocity out;
  if (!(best > 1e-12)) {
    out.equilibrium = true;
    out.v = Point::Zero(y.size());
    return out;
  }
  std::size_t pick = dirs.size();
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (q[k] < best * (1 - 1e-6)) continue;
    if (pick == dirs.size() || preferred(dirs[k], dirs[pick], c.policy)) pick = k;
  }
  out.v = best * dirs[pick];
  return out;
}

// Classical Runge-Kutta step of y' = -grad f(y); falls back to explicit Euler when a
// stage leaves the region where the gradient exists.
Point flow_step(const Functional& f, const Point& y, const Point& v, double h, bool smooth) {
  if (!smooth) return y + h * v;
  const auto g2 = finite_gradient(f, Point(y + 0.5 * h * v));
  if (!g2) return y + h * v;
  const Point k2 = -*g2;
  const auto g3 = finite_gradient(f, Point(y + 0.5 * h * k2));
  if (!g3) return y + h * v;
  const Point k3 = -*g3;
  const auto g4 = finite_gradient(f, Point(y + h * k3));
  if (!g4) return y + h * v;
  const Point k4 = -*g4;
  return y + h / 6 * (v + 2 * k2 + 2 * k3 + k4);
}

// Three-point first derivative on a non-uniform grid.
struct Weights {
  double minus = 0;
  double centre = 0;
  double plus = 0;
};

Weights derivative_weights(double h1, double h2) {
  return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
}

}  // namespace

void recompute_speeds(Trajectory& traj) {
  auto& S = traj.samples;
  const std::size_t n = S.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool has_prev = i > 0 && S[i - 1].segment == S[i].segment && S[i - 1].t < S[i].t;
    const bool has_next = i + 1 < n && S[i + 1].segment == S[i].segment && S[i + 1].t > S[i].t;
    if (has_prev && has_next) {
      const auto w = derivative_weights(S[i].t - S[i - 1].t, S[i + 1].t - S[i].t);
      const Point v = w.minus * S[i - 1].y + w.centre * S[i].y + w.plus * S[i + 1].y;
      S[i].speed = v.norm();
    } else if (has_next) {
      S[i].speed = distance(S[i].y, S[i + 1].y) / (S[i + 1].t - S[i].t);
    } else if (has_prev) {
      S[i].speed = distance(S[i - 1].y, S[i].y) / (S[i].t - S[i - 1].t);
    } else {
      S[i].speed = 0;
    }
  }
}

Trajectory integrate_maximal_slope(const Functional& f, const Point& x0, double T, const FlowControls& c) {
  if (!(T > 0)) throw std::invalid_argument("flow horizon must be positive");
  if (x0.size() != f.dimension) throw std::invalid_argument("x0 dimension does not match the functional");
  if (!(c.dt_max > 0) || !(c.safety > 0) || !(c.min_step > 0)) {
    throw std::invalid_argument("flow controls must be positive");
  }
  double fy = f(x0);
  if (!std::isfinite(fy)) throw std::invalid_argument("flow needs f(x0) finite");

  Trajectory traj;
  traj.x0 = x0;
  traj.infinite_budget = std::isinf(T);
  const double T_end = traj.infinite_budget ? c.budget : T;
  traj.T = T_end;

  Point y = x0;
  double t = 0;
  int segment = 0;
  auto slope_at = [&](const Point& p) { return descending_slope(f, p, c.schedule).value; };
  auto push = [&](double ts, const Point& p, double fp, double slope) {
    traj.samples.push_back({ts, p, fp, slope, 0.0, segment});
  };
  auto hold = [&](double from) {
    const double until = traj.infinite_budget ? from + c.tail : T_end;
    if (!(until > from)) return;
    const double spacing = std::max(c.dt_max, (until - from) / 1000);
    for (double s = from + spacing;; s += spacing) {
      const double ts = std::min(s, until);
      push(ts, y, fy, 0.0);
      if (ts >= until) break;
    }
    traj.T = traj.samples.back().t;
  };

  push(0, y, fy, slope_at(y));
  if (fy <= c.extinction_tol) {
    traj.extinct = true;
    traj.t_star = 0;
    traj.stop = FlowStop::extinction;
    traj.samples.back().slope = 0;
    hold(0);
  }

  while (!traj.extinct && traj.stop == FlowStop::horizon && t < T_end) {
    if (traj.samples.size() >= c.max_samples) {
      traj.stop = FlowStop::sample_limit;
      traj.partial = true;
      traj.diagnostic = "sample limit reached";
      break;
    }
    const auto g = finite_gradient(f, y);
    Point v;
    bool smooth = static_cast<bool>(g);
    if (smooth) {
      v = -*g;
    } else {
      auto sv = sampled_velocity(f, y, fy, c);
      if (sv.equilibrium) {
        traj.stop = FlowStop::equilibrium;
        traj.diagnostic = "equilibrium point reached";
        break;
      }
      v = sv.v;
    }
    const double speed2 = v.squaredNorm();
    if (!(speed2 > 0)) {
      traj.stop = FlowStop::equilibrium;
      traj.diagnostic = "equilibrium point reached";
      break;
    }
    double h = std::min({c.dt_max, T_end - t, c.safety * fy / speed2});
    if (!smooth) h = std::min(h, c.start_step);

    auto jumped_f = [&](double hh, const Point&, double fn) {
      return fy - fn > 2 * hh * speed2 + 1e-9 * std::max(1.0, fy) && !std::isinf(fn);
    };
    auto jumped_g = [&](const Point& yn) {
      if (!smooth) return false;
      const auto gn = finite_gradient(f, yn);
      if (!gn) return false;
      return (*gn - *g).norm() > c.jump_ratio * g->norm();
    };

    bool advanced = false;
    while (!advanced) {
      if (h < c.min_step) {
        const double s = sampled_slope(value_only(f), y, c.schedule).value;
        if (s <= 1e-9) {
          traj.stop = FlowStop::equilibrium;
          traj.diagnostic = fy > c.extinction_tol ? "stalled at an equilibrium that is not a minimiser"
                                                  : "equilibrium point reached";
        } else {
          traj.stop = FlowStop::step_underflow;
          traj.partial = true;
          traj.diagnostic = "step-size underflow near an unresolvable singularity";
        }
        break;
      }
      Point yn = flow_step(f, y, v, h, smooth);
      double fn = f(yn);
      if (!(fn <= fy + 1e-14 * std::max(1.0, fy))) {
        h /= 2;
        continue;
      }
      const bool fj = jumped_f(h, yn, fn);
      const bool gj = !fj && jumped_g(yn);
      if (fj || gj) {
        double lo = 0;
        double hi = h;
        Point y_hi = yn;
        double f_hi = fn;
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const Point ym = flow_step(f, y, v, mid, smooth);
          const double fm = f(ym);
          const bool jm = fj ? jumped_f(mid, ym, fm) : jumped_g(ym);
          if (jm) {
            hi = mid;
            y_hi = ym;
            f_hi = fm;
          } else {
            lo = mid;
          }
        }
        if (lo > 0) {
          const Point y_lo = flow_step(f, y, v, lo, smooth);
          const double f_lo = f(y_lo);
          push(t + lo, y_lo, f_lo, slope_at(y_lo));
        }
        double t_hi = t + hi;
        if (!(t_hi > traj.samples.back().t)) t_hi = std::nextafter(traj.samples.back().t, INFINITY);
        ++segment;
        traj.segment_boundaries.push_back(t_hi);
        traj.glued = true;
        t = t_hi;
        y = y_hi;
        fy = f_hi;
        push(t, y, fy, slope_at(y));
        advanced = true;
        break;
      }
      if (fn <= c.extinction_tol) {
        double lo = 0;
        double hi = h;
        Point y_hi = yn;
        double f_hi = fn;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          const Point ym = flow_step(f, y, v, mid, smooth);
          const double fm = f(ym);
          if (fm <= c.extinction_tol) {
            hi = mid;
            y_hi = ym;
            f_hi = fm;
          } else {
            lo = mid;
          }
        }
        t += hi;
        y = y_hi;
        fy = f_hi;
        push(t, y, fy, 0.0);
        traj.extinct = true;
        traj.t_star = t;
        traj.stop = FlowStop::extinction;
        advanced = true;
        break;
      }
      t += h;
      if (T_end - t < 1e-12 * std::max(1.0, T_end)) t = T_end;
      y = yn;
      fy = fn;
      push(t, y, fy, slope_at(y));
      advanced = true;
    }
  }

  if (traj.extinct) {
    if (traj.samples.size() > 1 || traj.infinite_budget) hold(traj.t_star);
  } else if (traj.stop == FlowStop::equilibrium) {
    hold(t);
  }
  if (std::isnan(traj.t_star)) traj.t_star = traj.samples.back().t;
  traj.limit_point = traj.samples.back().y;
  recompute_speeds(traj);
  return traj;
}

EdeReport verify_ede(const Trajectory& traj, const Functional& f) {
  (void)f;
  EdeReport rep;
  const auto& S = traj.samples;
  const std::size_t n = S.size();
  std::size_t star_index = n;
  if (traj.extinct) {
    for (std::size_t i = 0; i < n; ++i) {
      if (S[i].t >= traj.t_star) {
        star_index = i;
        break;
      }
    }
  } else if (traj.stop == FlowStop::equilibrium && n > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (S[i].y == S.back().y) {
        star_index = i;
        break;
      }
    }
  }
  auto near_boundary = [&](std::size_t i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 1, i + 2);
    for (std::size_t j = lo; j < hi; ++j) {
      if (S[j].segment != S[j + 1].segment) return true;
    }
    return false;
  };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const bool skip = near_boundary(i) || (star_index < n && i + 2 >= star_index && i <= star_index + 1) ||
                      !(S[i].t > S[i - 1].t) || !(S[i + 1].t > S[i].t);
    if (skip) {
      ++rep.skipped;
      continue;
    }
    const auto w = derivative_weights(S[i].t - S[i - 1].t, S[i + 1].t - S[i].t);
    const double df = w.minus * S[i - 1].f + w.centre * S[i].f + w.plus * S[i + 1].f;
    const double speed2 = S[i].speed * S[i].speed;
    const double slope2 = S[i].slope * S[i].slope;
    const double res = std::abs(-df - 0.5 * speed2 - 0.5 * slope2);
    const double eq = std::max(std::abs(-df - speed2), std::abs(-df - slope2));
    rep.residuals.push_back({S[i].t, res});
    rep.equality_residuals.push_back({S[i].t, eq});
    rep.max_residual = std::max(rep.max_residual, res);
    rep.max_equality_residual = std::max(rep.max_equality_residual, eq);
  }
  return rep;
}

std::vector<Trajectory> split_segments(const Trajectory& traj) {
  std::vector<Trajectory> out;
  for (const auto& s : traj.samples) {
    if (out.empty() || out.back().samples.back().segment != s.segment) {
      Trajectory seg;
      seg.x0 = s.y;
      seg.infinite_budget = false;
      out.push_back(std::move(seg));
    }
    auto& seg = out.back();
    seg.samples.push_back(s);
    seg.samples.back().segment = 0;
    seg.T = s.t;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& seg = out[k];
    seg.t_star = seg.T;
    if (k + 1 < out.size()) {
      seg.limit_point = out[k + 1].samples.front().y;
    } else {
      seg.limit_point = traj.limit_point;
      seg.t_star = traj.t_star;
      seg.extinct = traj.extinct;
      seg.infinite_budget = traj.infinite_budget;
      seg.stop = traj.stop;
      seg.partial = traj.partial;
      seg.diagnostic = traj.diagnostic;
    }
  }
  return out;
}

GluedResult glue_trajectories(const std::vector<Trajectory>& segments, const ParameterFunction& pf,
                              const AuxiliaryFunctions& aux, const Point& x0, double r,
                              const CertificateControls& controls) {
  if (segments.empty()) throw std::invalid_argument("glue needs at least one segment");
  GluedResult out;
  Trajectory& g = out.trajectory;
  g.x0 = segments.front().samples.empty() ? x0 : segments.front().samples.front().y;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    if (seg.samples.empty()) throw std::invalid_argument("glue: empty segment");
    double shift = 0;
    if (k > 0) {
      const auto& prev = segments[k - 1];
      const Point limit = prev.limit_point ? *prev.limit_point : prev.samples.back().y;
      const double gap = distance(limit, seg.samples.front().y);
      if (!(gap <= 1e-6)) {
        throw std::invalid_argument("glue: segment " + std::to_string(k) +
                                    " does not start at the limit of its predecessor");
      }
      const double last_t = g.samples.back().t;
      if (seg.samples.front().t <= last_t) shift = last_t - seg.samples.front().t;
      double start = seg.samples.front().t + shift;
      if (!(start > last_t)) {
        const double bumped = std::nextafter(last_t, INFINITY);
        shift += bumped - start;
        start = bumped;
      }
      g.segment_boundaries.push_back(start);
    }
    for (auto s : seg.samples) {
      s.t += shift;
      s.segment = static_cast<int>(k);
      g.samples.push_back(std::move(s));
    }
    if (k + 1 == segments.size()) {
      g.limit_point = seg.limit_point ? seg.limit_point : std::optional<Point>(seg.samples.back().y);
      g.extinct = seg.extinct;
      g.t_star = std::isnan(seg.t_star) ? g.samples.back().t : seg.t_star + shift;
      g.infinite_budget = seg.infinite_budget;
      g.stop = seg.stop;
      g.partial = seg.partial;
      g.diagnostic = seg.diagnostic;
    }
  }
  g.T = g.samples.back().t;
  g.glued = segments.size() > 1;
  recompute_speeds(g);
  out.certificates = certify_rates_continuous(g, pf, aux, x0, r, controls);
  if (g.glued) {
    for (auto& c : out.certificates) c.label = "glued-" + c.label;
  }
  return out;
}

}  // namespace klflow
