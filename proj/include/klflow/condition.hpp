#pragma once

#include "klflow/core.hpp"
#include "klflow/parameter_function.hpp"
#include "klflow/slope.hpp"

#include <limits>
#include <string>

namespace klflow {

enum class ConditionKind { A, A_prime, C, C_prime };

const char* to_string(ConditionKind kind);

struct Witness {
  bool found = false;
  Point x;
  double f = 0;
  double slope = 0;
  /// Score minus threshold at the witness: ratio - rhs for C, theta'(f)|df| - 1 for A.
  double margin = std::numeric_limits<double>::infinity();
};

struct ConditionControls {
  std::size_t sample_count = 4096;
  SlopeSchedule schedule;
  /// Slope condition accepted at >= 1 - slope_tol.
  double slope_tol = 1e-6;
  /// Relative tolerance on the budget inequality theta(f(x0)) <= r.
  double budget_rel_tol = 1e-9;
  std::size_t refine_iterations = 200;
};

struct ConditionReport {
  ConditionKind condition = ConditionKind::A;
  bool holds = false;
  double alpha_estimate = std::numeric_limits<double>::quiet_NaN();
  Witness worst_witness;
  double r = 0;
  Point x0;
  double f0 = 0;
  /// r - theta(f(x0)); for C the equivalent r - 2 sqrt(f(x0)/alpha).
  double theta_budget = 0;
  /// Condition C: 4 f(x0) / r^2.
  double rhs = std::numeric_limits<double>::quiet_NaN();
  /// Condition A: sampled minimum of theta'(f) |df| over the admissible set.
  double min_slope_product = std::numeric_limits<double>::quiet_NaN();
  bool budget_ok = false;
  bool slope_ok = false;
  bool equilibrium_start = false;
  bool empty_admissible = false;
  std::size_t samples = 0;
};

struct AlphaEstimate {
  double value = std::numeric_limits<double>::infinity();
  Witness witness;
  bool empty_admissible = false;
  std::size_t samples = 0;
};

/// inf of |df|^2 / f over a deterministic sample of B_r(x0) and {0 < f <= f(x0)},
/// refined by pattern search around the three smallest ratios.
AlphaEstimate estimate_alpha_detailed(const Functional& f, const Point& x0, double r,
                                      const ConditionControls& controls = {});

double estimate_alpha(const Functional& f, const Point& x0, double r, std::size_t sample_count = 4096);

/// Condition C (kind = C) or C' (kind = C_prime): alpha(x0, r) >= 4 f(x0) / r^2.
ConditionReport check_condition_C(const Functional& f, const Point& x0, double r,
                                  ConditionKind kind = ConditionKind::C, const ConditionControls& controls = {});

/// Condition A (kind = A) or A' (kind = A_prime) for the parameter function pf.
ConditionReport check_condition_A(const Functional& f, const ParameterFunction& pf, const Point& x0, double r,
                                  ConditionKind kind = ConditionKind::A, const ConditionControls& controls = {});

}  // namespace klflow
