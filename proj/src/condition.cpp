#include "klflow/condition.hpp"

#include "klflow/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace klflow {

const char* to_string(ConditionKind kind) {
  switch (kind) {
    case ConditionKind::A: return "A";
    case ConditionKind::A_prime: return "A'";
    case ConditionKind::C: return "C";
    case ConditionKind::C_prime: return "C'";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  double score = kInf;
  Point x;
  double f = 0;
  double slope = 0;
};

struct ScanResult {
  bool empty = true;
  Candidate best;
  std::size_t samples = 0;
};

// Minimises score(f, slope) over B_r(x0) and {0 < f <= f0}: deterministic ball samples,
// then a compass search from the three best samples. Only score comparisons drive the
// search, so monotone transforms of the score follow the same path.
template <typename Score>
ScanResult scan_admissible(const Functional& f, const Point& x0, double r, double f0,
                           const ConditionControls& controls, Score score) {
  ScanResult out;
  auto evaluate = [&](const Point& p, Candidate& c) {
    if (!((p - x0).norm() < r)) return false;
    const double fp = f(p);
    if (!(fp > 0) || !(fp <= f0)) return false;
    c.x = p;
    c.f = fp;
    c.slope = descending_slope(f, p, controls.schedule).value;
    c.score = score(fp, c.slope);
    return true;
  };

  const auto pts = ball_samples<double>(x0, r, controls.sample_count);
  std::vector<Candidate> admissible;
  for (const auto& p : pts) {
    Candidate c;
    ++out.samples;
    if (evaluate(p, c)) admissible.push_back(std::move(c));
  }
  if (admissible.empty()) return out;
  out.empty = false;

  const std::size_t keep = std::min<std::size_t>(3, admissible.size());
  std::partial_sort(admissible.begin(), admissible.begin() + static_cast<std::ptrdiff_t>(keep), admissible.end(),
                    [](const Candidate& a, const Candidate& b) { return a.score < b.score; });
  out.best = admissible.front();

  const auto n = static_cast<double>(x0.size());
  const double step0 = 2 * r / std::pow(static_cast<double>(controls.sample_count), 1.0 / n);
  const double step_min = 1e-13 * std::max(1.0, r);
  for (std::size_t s = 0; s < keep; ++s) {
    Candidate cur = admissible[s];
    double step = step0;
    for (std::size_t it = 0; it < controls.refine_iterations && step > step_min; ++it) {
      bool moved = false;
      for (Eigen::Index d = 0; d < x0.size() && !moved; ++d) {
        for (double sign : {1.0, -1.0}) {
          Point y = cur.x;
          y(d) += sign * step;
          Candidate c;
          ++out.samples;
          if (evaluate(y, c) && c.score < cur.score) {
            cur = std::move(c);
            moved = true;
            break;
          }
        }
      }
      if (!moved) step /= 2;
    }
    if (cur.score < out.best.score) out.best = cur;
  }
  return out;
}

double checked_f0(const Functional& f, const Point& x0, double r) {
  if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("condition check needs finite r > 0");
  if (x0.size() != f.dimension) throw std::invalid_argument("x0 dimension does not match the functional");
  const double f0 = f(x0);
  if (!std::isfinite(f0)) throw std::invalid_argument("condition check needs f(x0) finite");
  if (f0 < 0) throw std::invalid_argument("functional values must be nonnegative");
  return f0;
}

}  // namespace

AlphaEstimate estimate_alpha_detailed(const Functional& f, const Point& x0, double r,
                                      const ConditionControls& controls) {
  const double f0 = checked_f0(f, x0, r);
  AlphaEstimate est;
  if (f0 == 0) {
    est.empty_admissible = true;
    return est;
  }
  const auto scan =
      scan_admissible(f, x0, r, f0, controls, [](double fx, double slope) { return slope * slope / fx; });
  est.samples = scan.samples;
  if (scan.empty) {
    est.empty_admissible = true;
    return est;
  }
  est.value = scan.best.score;
  est.witness.found = true;
  est.witness.x = scan.best.x;
  est.witness.f = scan.best.f;
  est.witness.slope = scan.best.slope;
  est.witness.margin = scan.best.score;
  return est;
}

double estimate_alpha(const Functional& f, const Point& x0, double r, std::size_t sample_count) {
  ConditionControls controls;
  controls.sample_count = sample_count;
  return estimate_alpha_detailed(f, x0, r, controls).value;
}

ConditionReport check_condition_C(const Functional& f, const Point& x0, double r, ConditionKind kind,
                                  const ConditionControls& controls) {
  if (kind != ConditionKind::C && kind != ConditionKind::C_prime) {
    throw std::invalid_argument("check_condition_C handles C and C' only");
  }
  ConditionReport rep;
  rep.condition = kind;
  rep.r = r;
  rep.x0 = x0;
  rep.f0 = checked_f0(f, x0, r);
  if (rep.f0 == 0) {
    rep.holds = rep.budget_ok = rep.slope_ok = true;
    rep.equilibrium_start = true;
    rep.alpha_estimate = kInf;
    rep.theta_budget = r;
    rep.rhs = 0;
    return rep;
  }
  const auto est = estimate_alpha_detailed(f, x0, r, controls);
  rep.alpha_estimate = est.value;
  rep.empty_admissible = est.empty_admissible;
  rep.samples = est.samples;
  rep.rhs = 4 * rep.f0 / (r * r);
  rep.worst_witness = est.witness;
  if (rep.worst_witness.found) rep.worst_witness.margin = est.value - rep.rhs;
  rep.theta_budget = est.value > 0 ? r - 2 * std::sqrt(rep.f0 / est.value) : -kInf;
  const double tol = controls.budget_rel_tol;
  if (kind == ConditionKind::C) {
    rep.holds = est.value >= rep.rhs / ((1 + tol) * (1 + tol));
  } else {
    rep.holds = est.value > rep.rhs / ((1 - tol) * (1 - tol));
  }
  if (std::abs(rep.theta_budget) <= tol * r) rep.theta_budget = 0;
  rep.budget_ok = rep.holds;
  rep.slope_ok = true;
  return rep;
}

ConditionReport check_condition_A(const Functional& f, const ParameterFunction& pf, const Point& x0, double r,
                                  ConditionKind kind, const ConditionControls& controls) {
  if (kind != ConditionKind::A && kind != ConditionKind::A_prime) {
    throw std::invalid_argument("check_condition_A handles A and A' only");
  }
  ConditionReport rep;
  rep.condition = kind;
  rep.r = r;
  rep.x0 = x0;
  rep.f0 = checked_f0(f, x0, r);
  if (rep.f0 == 0) {
    rep.holds = rep.budget_ok = rep.slope_ok = true;
    rep.equilibrium_start = true;
    rep.theta_budget = r;
    return rep;
  }
  const double theta0 = pf(rep.f0);
  rep.theta_budget = r - theta0;
  if (std::abs(rep.theta_budget) <= controls.budget_rel_tol * r) rep.theta_budget = 0;
  rep.budget_ok = kind == ConditionKind::A ? rep.theta_budget >= 0 : rep.theta_budget > 0;

  const auto scan = scan_admissible(f, x0, r, rep.f0, controls,
                                    [&pf](double fx, double slope) { return pf.derivative(fx) * slope; });
  rep.samples = scan.samples;
  if (scan.empty) {
    rep.empty_admissible = true;
    rep.min_slope_product = kInf;
    rep.slope_ok = true;
  } else {
    rep.min_slope_product = scan.best.score;
    rep.slope_ok = scan.best.score >= 1 - controls.slope_tol;
    rep.worst_witness.found = true;
    rep.worst_witness.x = scan.best.x;
    rep.worst_witness.f = scan.best.f;
    rep.worst_witness.slope = scan.best.slope;
    rep.worst_witness.margin = scan.best.score - 1;
  }
  rep.holds = rep.budget_ok && rep.slope_ok;
  return rep;
}

}  // namespace klflow
