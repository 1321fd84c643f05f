#include "klflow/prox.hpp"

#include "klflow/quadrature.hpp"
#include "klflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klflow {

const char* to_string(TiePolicy policy) {
  switch (policy) {
    case TiePolicy::smallest_distance: return "smallest-distance";
    case TiePolicy::positive_branch: return "positive-branch";
    case TiePolicy::negative_branch: return "negative-branch";
    case TiePolicy::lexicographic: return "lexicographic";
  }
  return "?";
}

TiePolicy tie_policy_from_string(const std::string& name) {
  if (name == "smallest-distance") return TiePolicy::smallest_distance;
  if (name == "positive-branch" || name == "positive") return TiePolicy::positive_branch;
  if (name == "negative-branch" || name == "negative") return TiePolicy::negative_branch;
  if (name == "lexicographic") return TiePolicy::lexicographic;
  throw std::invalid_argument("unknown tie policy: " + name);
}

bool ProxSequence::constant_tau() const {
  return std::all_of(taus.begin(), taus.end(), [&](double t) { return t == taus.front(); });
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Objective {
  const Functional& f;
  const Point& x;
  double tau;
  std::size_t* evaluations;

  double operator()(const Point& y) const {
    ++*evaluations;
    const double fy = f(y);
    if (!std::isfinite(fy)) return kInf;
    return fy + (y - x).squaredNorm() / (2 * tau);
  }
};

struct Candidate {
  Point y;
  double phi = kInf;
  bool converged = false;
  bool stationary = false;
};

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

// phi'(y) in one dimension where the gradient oracle is defined.
std::optional<double> phi_derivative(const Functional& f, double x, double tau, double y) {
  if (!f.has_gradient()) return std::nullopt;
  const auto g = f.gradient(scalar_point(y));
  if (!g || !std::isfinite((*g)(0))) return std::nullopt;
  return (*g)(0) + (y - x) / tau;
}

Candidate refine_1d(const Functional& f, const Objective& phi, double x, double tau, double a, double b) {
  auto eval = [&](double y) { return phi(scalar_point(y)); };
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double lo = a;
  double hi = b;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = eval(x2);
    }
  }
  Candidate best;
  best.y = scalar_point(f1 <= f2 ? x1 : x2);
  best.phi = std::min(f1, f2);
  best.converged = true;

  // Sign change of phi' across the bracket: bisect down to adjacent doubles.
  const auto da = phi_derivative(f, x, tau, a);
  const auto db = phi_derivative(f, x, tau, b);
  if (da && db && *da < 0 && *db > 0) {
    double l = a;
    double h = b;
    for (int it = 0; it < 4000; ++it) {
      const double m = 0.5 * (l + h);
      if (m <= l || m >= h) break;
      const auto dm = phi_derivative(f, x, tau, m);
      if (!dm) {
        const double vm = eval(m);
        const double left = eval(std::nextafter(m, -kInf));
        const double right = eval(std::nextafter(m, kInf));
        if (left >= vm && right >= vm) {
          l = h = m;
          break;
        }
        if (left < right) {
          h = m;
        } else {
          l = m;
        }
        continue;
      }
      if (*dm > 0) {
        h = m;
      } else if (*dm < 0) {
        l = m;
      } else {
        l = h = m;
        break;
      }
    }
    const double vl = eval(l);
    const double vh = eval(h);
    const double y = vl <= vh ? l : h;
    const double v = std::min(vl, vh);
    if (v <= best.phi + 8 * std::numeric_limits<double>::epsilon() * std::abs(best.phi)) {
      best.phi = v;
      best.y = scalar_point(y);
      best.stationary = true;
    }
  }
  return best;
}

std::vector<Candidate> search_1d(const Functional& f, const Objective& phi, double x, double tau, double R,
                                 const ResolventControls& c) {
  const std::size_t n = std::max<std::size_t>(c.grid_points, 5);
  const double lo = x - R;
  const double hi = x + R;
  std::vector<double> ys(n);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    vals[i] = phi(scalar_point(ys[i]));
  }
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? vals[i - 1] : kInf;
    const double right = i + 1 < n ? vals[i + 1] : kInf;
    if (std::isfinite(vals[i]) && vals[i] <= left && vals[i] <= right) minima.push_back(i);
  }
  std::sort(minima.begin(), minima.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
  if (minima.size() > 8) minima.resize(8);
  std::vector<Candidate> out;
  for (std::size_t i : minima) {
    const double a = ys[i > 0 ? i - 1 : 0];
    const double b = ys[i + 1 < n ? i + 1 : n - 1];
    Candidate cand = refine_1d(f, phi, x, tau, a, b);
    if (vals[i] < cand.phi && !cand.stationary) {
      cand.y = scalar_point(ys[i]);
      cand.phi = vals[i];
    }
    out.push_back(std::move(cand));
  }
  Candidate at_x;
  at_x.y = scalar_point(x);
  at_x.phi = phi(at_x.y);
  at_x.converged = true;
  out.push_back(std::move(at_x));
  return out;
}

Candidate local_descent(const Functional& f, const Objective& phi, const Point& x, double tau, Point y,
                        double step0, const ResolventControls& c) {
  Candidate cur;
  cur.y = std::move(y);
  cur.phi = phi(cur.y);
  if (!std::isfinite(cur.phi)) return cur;
  double step = step0;
  for (std::size_t it = 0; it < c.max_iterations; ++it) {
    std::optional<Point> g;
    if (f.has_gradient()) g = f.gradient(cur.y);
    if (g && g->allFinite()) {
      const Point grad = *g + (cur.y - x) / tau;
      const double gn = grad.norm();
      if (gn <= 1e-14 * std::max(1.0, std::abs(cur.phi))) {
        cur.converged = true;
        return cur;
      }
      double t = std::max(step, 1e-300) / gn;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Point yn = cur.y - t * grad;
        const double v = phi(yn);
        if (v <= cur.phi - 1e-4 * t * gn * gn) {
          cur.y = yn;
          cur.phi = v;
          step = 2 * t * gn;
          moved = true;
          break;
        }
        t /= 2;
      }
      if (!moved) {
        cur.converged = true;
        return cur;
      }
    } else {
      bool moved = false;
      for (Eigen::Index d = 0; d < cur.y.size() && !moved; ++d) {
        for (double sgn : {1.0, -1.0}) {
          Point yn = cur.y;
          yn(d) += sgn * step;
          const double v = phi(yn);
          if (v < cur.phi) {
            cur.y = yn;
            cur.phi = v;
            moved = true;
            break;
          }
        }
      }
      if (!moved) step /= 2;
      if (step < 1e-15 * std::max(1.0, cur.y.norm())) {
        cur.converged = true;
        return cur;
      }
    }
  }
  return cur;
}

std::vector<Candidate> search_nd(const Functional& f, const Objective& phi, const Point& x, double tau, double R,
                                 const ResolventControls& c) {
  std::vector<Candidate> out;
  const auto starts = ball_samples<double>(x, R, std::max<std::size_t>(c.starts, 1));
  const double step0 = R / 8;
  for (const auto& s : starts) out.push_back(local_descent(f, phi, x, tau, s, step0, c));
  return out;
}

}  // namespace

Point select_branch(const std::vector<Point>& candidates, const Point& from, TiePolicy policy) {
  if (candidates.empty()) throw std::invalid_argument("select_branch needs candidates");
  std::size_t pick = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const Point& a = candidates[k];
    const Point& b = candidates[pick];
    bool better = false;
    switch (policy) {
      case TiePolicy::smallest_distance: {
        const double da = distance(a, from);
        const double db = distance(b, from);
        better = da < db || (da == db && lex_less(a, b));
        break;
      }
      case TiePolicy::positive_branch:
        better = a.sum() > b.sum() || (a.sum() == b.sum() && lex_less(a, b));
        break;
      case TiePolicy::negative_branch:
        better = a.sum() < b.sum() || (a.sum() == b.sum() && lex_less(a, b));
        break;
      case TiePolicy::lexicographic: better = lex_less(a, b); break;
    }
    if (better) pick = k;
  }
  return candidates[pick];
}

ResolventResult resolvent(const Functional& f, const Point& x, double tau, const ResolventControls& c) {
  if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("resolvent needs finite tau > 0");
  if (!(tau < c.tau_bar)) throw std::invalid_argument("resolvent needs tau below tau_bar");
  if (x.size() != f.dimension) throw std::invalid_argument("x dimension does not match the functional");
  const double fx = f(x);
  if (!std::isfinite(fx)) throw std::invalid_argument("resolvent needs f(x) finite");
  ResolventResult res;
  const double R = std::sqrt(2 * tau * fx);
  if (R == 0) {
    res.points = {x};
    res.objective = fx;
    return res;
  }
  const double box = R * (1 + 1e-9) + 1e-300;
  Objective phi{f, x, tau, &res.evaluations};
  std::vector<Candidate> cands = x.size() == 1 ? search_1d(f, phi, x(0), tau, box, c) : search_nd(f, phi, x, tau, box, c);
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.phi < b.phi; });
  const double best = cands.front().phi;
  const double tie = c.tie_tol * std::abs(best);
  const double dedupe = 1e-7 * std::max(R, 1e-300);
  for (const auto& cand : cands) {
    if (cand.phi > best + tie) break;
    const bool dup = std::any_of(res.points.begin(), res.points.end(),
                                 [&](const Point& p) { return distance(p, cand.y) <= dedupe; });
    if (!dup) res.points.push_back(cand.y);
  }
  res.objective = best;
  res.certified = cands.front().converged && std::isfinite(best);
  return res;
}

ProxSequence run_prox_sequence(const Functional& f, const Point& x0, double tau, std::size_t max_steps,
                               const ProxControls& controls) {
  return run_prox_sequence(f, x0, std::vector<double>(max_steps, tau), controls);
}

ProxSequence run_prox_sequence(const Functional& f, const Point& x0, const std::vector<double>& taus,
                               const ProxControls& controls) {
  ProxSequence seq;
  seq.x0 = x0;
  seq.f0 = f(x0);
  if (!std::isfinite(seq.f0)) throw std::invalid_argument("prox sequence needs f(x0) finite");
  if (seq.f0 <= controls.f_stop) seq.terminated_at = 0;
  Point y = x0;
  double fy = seq.f0;
  seq.stop_reason = "max-steps";
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (controls.f_stop > 0 && fy <= controls.f_stop) {
      seq.stop_reason = "f-stop";
      break;
    }
    if (fy == 0) {
      seq.stop_reason = "f-zero";
      break;
    }
    const double tau = taus[k];
    const auto res = resolvent(f, y, tau, controls.resolvent);
    ProxStep step;
    step.tau = tau;
    step.from = y;
    step.to = select_branch(res.points, y, controls.policy);
    step.f_from = fy;
    step.f_to = f(step.to);
    step.dist = distance(step.from, step.to);
    step.slope_to = descending_slope(f, step.to, controls.schedule).value;
    step.slope_bound_lhs = step.dist;
    step.slope_bound_rhs = tau * step.slope_to;
    step.certified = res.certified;
    step.tie_count = res.points.size();
    if (controls.compute_de_giorgi) {
      step.de_giorgi_residual = de_giorgi_residual(f, y, tau, 20, controls.resolvent).residual;
    }
    if (!step.certified) seq.flagged = true;
    seq.taus.push_back(tau);
    y = step.to;
    fy = step.f_to;
    const double d = step.dist;
    seq.steps.push_back(std::move(step));
    if (!seq.terminated_at && fy <= controls.f_stop) seq.terminated_at = seq.steps.size();
    if (d <= controls.stall_tol) {
      seq.stop_reason = "stall";
      break;
    }
  }
  if (controls.f_stop > 0 && fy <= controls.f_stop) seq.stop_reason = "f-stop";
  seq.limit_point = y;
  return seq;
}

DeGiorgiResult de_giorgi_residual(const Functional& f, const Point& x, double tau, int levels,
                                  const ResolventControls& controls) {
  DeGiorgiResult out;
  out.f_x = f(x);
  auto z_at = [&](double s) {
    const auto res = resolvent(f, x, s, controls);
    ++out.resolvent_calls;
    if (!res.certified) out.valid = false;
    return select_branch(res.points, x, TiePolicy::smallest_distance);
  };
  auto integrand = [&](double s) {
    const Point z = z_at(s);
    const double d = distance(x, z);
    return d * d / (2 * s * s);
  };
  const Point z = z_at(tau);
  out.f_z = f(z);
  const double dz = distance(x, z);
  out.distance_term = dz * dz / (2 * tau);
  double integral = 0;
  double hi = tau;
  for (int j = 0; j < levels; ++j) {
    const double lo = hi / 2;
    integral += adaptive_simpson(integrand, lo, hi, 1e-12 * std::max(1.0, out.f_x), 12).value;
    hi = lo;
  }
  integral += hi * integrand(hi);
  out.integral = integral;
  out.residual = std::abs(out.f_z + out.distance_term + out.integral - out.f_x);
  return out;
}

bool check_step_monotonicity(const Functional& f, const Point& x, double tau0, double tau1, TiePolicy policy,
                             double tol, const ResolventControls& controls) {
  if (!(tau0 <= tau1)) throw std::invalid_argument("monotonicity check needs tau0 <= tau1");
  const Point z0 = select_branch(resolvent(f, x, tau0, controls).points, x, policy);
  const Point z1 = select_branch(resolvent(f, x, tau1, controls).points, x, policy);
  return f(z0) >= f(z1) - tol;
}

double one_step_decay_check(const ProxStep& step, const ParameterFunction& pf) {
  if (step.f_to <= 0) return kInf;
  const double d = pf.derivative(step.f_to);
  return (step.f_from - step.f_to) - step.tau / (d * d);
}

IoffeResult ioffe_distance_check(const Functional& g, const IoffeQuery& q, const IoffeScan& scan) {
  const double gx = g(q.x);
  if (!std::isfinite(gx)) throw std::invalid_argument("Ioffe check needs g(x) finite");
  if (!(q.delta <= gx)) throw std::invalid_argument("Ioffe check needs delta <= g(x)");
  if (!(q.R > 0) || !(q.v > 0)) throw std::invalid_argument("Ioffe check needs R, v > 0");
  if (!(q.v > (gx - q.delta) / q.R)) throw std::invalid_argument("Ioffe check needs v > (g(x) - delta) / R");
  IoffeResult out;
  out.bound = (gx - q.delta) / q.v;
  if (gx <= q.delta) {
    out.distance = 0;
    out.nearest = q.x;
    out.holds = true;
    out.slope_verified = true;
    return out;
  }

  // Slope lower bound on B_R(x) and {delta < g <= g(x)}.
  out.slope_verified = true;
  for (const auto& p : ball_samples<double>(q.x, q.R, scan.slope_samples)) {
    const double gp = g(p);
    if (!(gp > q.delta) || !(gp <= gx)) continue;
    if (descending_slope(g, p, scan.schedule).value < q.v * (1 - 1e-6)) {
      out.slope_verified = false;
      break;
    }
  }

  const double level = q.delta + scan.value_tol;
  auto consider = [&](const Point& p) {
    const double d = distance(p, q.x);
    if (d < out.distance && d <= q.R && g(p) <= level) {
      out.distance = d;
      out.nearest = p;
    }
  };
  if (q.x.size() == 1) {
    const std::size_t n = std::max<std::size_t>(scan.grid_points, 5);
    const double x = q.x(0);
    std::vector<double> ys(n);
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) {
      ys[i] = x - q.R + 2 * q.R * static_cast<double>(i) / static_cast<double>(n - 1);
      vals[i] = g(scalar_point(ys[i]));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (vals[i] <= level) consider(scalar_point(ys[i]));
      // Sublevel boundary between neighbours: bisect towards x.
      if (i + 1 < n && (vals[i] <= level) != (vals[i + 1] <= level)) {
        double in = vals[i] <= level ? ys[i] : ys[i + 1];
        double outp = vals[i] <= level ? ys[i + 1] : ys[i];
        for (int it = 0; it < 200; ++it) {
          const double m = 0.5 * (in + outp);
          if (m == in || m == outp) break;
          if (g(scalar_point(m)) <= level) {
            in = m;
          } else {
            outp = m;
          }
        }
        consider(scalar_point(in));
      }
      // Local minima of g may dip below the level between grid points.
      const double left = i > 0 ? vals[i - 1] : kInf;
      const double right = i + 1 < n ? vals[i + 1] : kInf;
      if (i > 0 && i + 1 < n && vals[i] <= left && vals[i] <= right) {
        double a = ys[i - 1];
        double b = ys[i + 1];
        const double inv_phi = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
          const double x1 = b - inv_phi * (b - a);
          const double x2 = a + inv_phi * (b - a);
          if (g(scalar_point(x1)) <= g(scalar_point(x2))) {
            b = x2;
          } else {
            a = x1;
          }
        }
        consider(scalar_point(0.5 * (a + b)));
      }
    }
  } else {
    const auto pts = ball_samples<double>(q.x, q.R, scan.grid_points);
    for (const auto& p : pts) consider(p);
  }
  if (!std::isfinite(out.distance)) {
    out.inconclusive = true;
    return out;
  }
  out.holds = out.distance <= out.bound + 1e-9 * std::max(1.0, out.bound);
  return out;
}

LimitDiagnostics limit_diagnostics(const ProxSequence& seq, const Functional& f, double tol) {
  LimitDiagnostics out;
  const bool terminated = seq.terminated_at.has_value();
  const bool stalled = seq.stop_reason == "stall" || seq.stop_reason == "f-stop" || seq.stop_reason == "f-zero";
  out.converged = terminated || stalled;
  if (!out.converged || !seq.limit_point) {
    out.inconclusive = true;
    return out;
  }
  out.f_limit = f(*seq.limit_point);
  out.f_last = seq.value(seq.size() - 1);
  out.continuity_gap = std::abs(out.f_limit - out.f_last);
  const std::size_t n = seq.steps.size();
  const std::size_t from = n > 5 ? n - 5 : 0;
  for (std::size_t k = from; k < n; ++k) out.late_slopes.push_back(seq.steps[k].slope_to);
  const double last_slope = out.late_slopes.empty() ? 0.0 : out.late_slopes.back();
  out.slopes_decay = last_slope <= tol || (terminated && out.f_last <= tol);
  return out;
}

double recursion_equality_step(double prev, double alpha, double delta) {
  if (!(prev > 0)) return 0;
  if (delta == 1) return prev / (1 + alpha);
  if (delta == 2) return 2 * prev / (1 + std::sqrt(1 + 4 * alpha * prev));
  auto h = [&](double u) { return u + alpha * std::pow(u, delta); };
  double hi = prev;
  double lo = prev;
  while (h(lo) > prev) {
    lo /= 2;
    if (lo < std::numeric_limits<double>::denorm_min() * 4) return 0;
  }
  for (int it = 0; it < 2000; ++it) {
    const double m = std::sqrt(lo) * std::sqrt(hi);
    const double mid = (m > lo && m < hi) ? m : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) > prev) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

std::vector<RecursionRow> recursion_table(const RecursiveBoundParams& params, std::size_t k_max) {
  std::vector<RecursionRow> rows;
  rows.reserve(k_max + 1);
  double f = params.f0;
  for (std::size_t k = 0; k <= k_max; ++k) {
    if (k > 0) f = recursion_equality_step(f, params.alpha, params.delta_exp);
    const double b = recursive_bound(params, static_cast<double>(k)).value;
    rows.push_back({k, f, b, b - f});
  }
  return rows;
}

}  // namespace klflow
