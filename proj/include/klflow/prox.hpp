#pragma once

#include "klflow/certificate.hpp"
#include "klflow/core.hpp"
#include "klflow/parameter_function.hpp"
#include "klflow/recursion.hpp"
#include "klflow/slope.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace klflow {

/// Selection rule among near-tied resolvent points.
enum class TiePolicy { smallest_distance, positive_branch, negative_branch, lexicographic };

const char* to_string(TiePolicy policy);
TiePolicy tie_policy_from_string(const std::string& name);

struct ResolventControls {
  /// Grid size of the one-dimensional scan.
  std::size_t grid_points = 4001;
  /// Multi-start count in dimension >= 2.
  std::size_t starts = 96;
  std::size_t max_iterations = 4000;
  /// Near-ties within tie_tol * |best objective| are all returned.
  double tie_tol = 1e-10;
  /// Upper bound on admissible step sizes; the default accepts every tau.
  double tau_bar = std::numeric_limits<double>::infinity();
};

struct ResolventResult {
  std::vector<Point> points;
  double objective = std::numeric_limits<double>::infinity();
  bool certified = true;
  std::size_t evaluations = 0;
};

/// Global minimisers of y -> f(y) + d(x, y)^2 / (2 tau). Every minimiser lies in the
/// ball of radius sqrt(2 tau f(x)) around x, which bounds the search.
ResolventResult resolvent(const Functional& f, const Point& x, double tau, const ResolventControls& controls = {});

/// Picks one point of a resolvent set by policy.
Point select_branch(const std::vector<Point>& candidates, const Point& from, TiePolicy policy);

struct ProxStep {
  double tau = 0;
  Point from;
  Point to;
  double f_from = 0;
  double f_to = 0;
  double dist = 0;
  /// d(x, z) and tau |df|(z).
  double slope_bound_lhs = 0;
  double slope_bound_rhs = 0;
  double slope_to = 0;
  double de_giorgi_residual = std::numeric_limits<double>::quiet_NaN();
  bool certified = true;
  std::size_t tie_count = 1;
};

struct ProxControls {
  ResolventControls resolvent;
  TiePolicy policy = TiePolicy::smallest_distance;
  /// Stop once f(y_k) <= f_stop; 0 disables the rule.
  double f_stop = 1e-14;
  /// Stop once d(y_k, y_{k+1}) <= stall_tol.
  double stall_tol = 1e-14;
  bool compute_de_giorgi = false;
  SlopeSchedule schedule;
};

struct ProxSequence {
  std::vector<ProxStep> steps;
  Point x0;
  double f0 = 0;
  std::vector<double> taus;
  std::optional<Point> limit_point;
  /// First index k with f(y_k) <= f_stop.
  std::optional<std::size_t> terminated_at;
  bool flagged = false;
  std::string stop_reason;

  std::size_t size() const { return steps.size() + 1; }
  const Point& iterate(std::size_t k) const { return k == 0 ? x0 : steps[k - 1].to; }
  double value(std::size_t k) const { return k == 0 ? f0 : steps[k - 1].f_to; }
  bool constant_tau() const;
};

ProxSequence run_prox_sequence(const Functional& f, const Point& x0, double tau, std::size_t max_steps,
                               const ProxControls& controls = {});

/// Variable step sizes tau_k; the sequence has at most taus.size() steps.
ProxSequence run_prox_sequence(const Functional& f, const Point& x0, const std::vector<double>& taus,
                               const ProxControls& controls = {});

struct DeGiorgiResult {
  double residual = std::numeric_limits<double>::quiet_NaN();
  double f_x = 0;
  double f_z = 0;
  double distance_term = 0;
  double integral = 0;
  bool valid = true;
  std::size_t resolvent_calls = 0;
};

/// |f(z) + d(x,z)^2/(2 tau) + int_0^tau d(x,z_s)^2/(2 s^2) ds - f(x)| with z_s in J_s(x).
/// The integral uses geometric panels tau 2^-j, j = 0..levels, adaptive Simpson with
/// Richardson correction on each panel, and s g(s) on the innermost piece.
DeGiorgiResult de_giorgi_residual(const Functional& f, const Point& x, double tau, int levels = 20,
                                  const ResolventControls& controls = {});

/// f at J_tau0(x) >= f at J_tau1(x) - tol for the branches selected by policy.
bool check_step_monotonicity(const Functional& f, const Point& x, double tau0, double tau1,
                             TiePolicy policy = TiePolicy::smallest_distance, double tol = 1e-12,
                             const ResolventControls& controls = {});

/// (f_from - f_to) - tau / theta'(f_to)^2; +inf when f_to = 0.
double one_step_decay_check(const ProxStep& step, const ParameterFunction& pf);

struct IoffeQuery {
  Point x;
  double delta = 0;
  double R = 1;
  double v = 1;
};

struct IoffeScan {
  std::size_t grid_points = 4001;
  double value_tol = 1e-10;
  SlopeSchedule schedule;
  std::size_t slope_samples = 2000;
};

struct IoffeResult {
  bool holds = false;
  bool inconclusive = false;
  bool slope_verified = false;
  double distance = std::numeric_limits<double>::infinity();
  double bound = 0;
  Point nearest;
};

/// Brute-force distance from x to {g <= delta} in the box of radius R against
/// (g(x) - delta) / v. Throws std::invalid_argument when v <= (g(x) - delta) / R.
IoffeResult ioffe_distance_check(const Functional& g, const IoffeQuery& q, const IoffeScan& scan = {});

struct DiscreteControls {
  double tol = 1e-7;
  std::size_t max_pair_samples = 500;
  /// Tolerance on the minimality inequality of each step.
  double minimality_tol = 1e-12;
};

enum class PowerRegime { finite_termination, superlinear, exponential, polynomial };

const char* to_string(PowerRegime regime);
PowerRegime regime_for_gamma(double gamma);

/// Regime-specific bounds for the power family theta(u) = (c/gamma) u^gamma.
/// Throws std::invalid_argument when the regime does not match gamma or the sequence
/// uses variable step sizes.
std::vector<RateCertificate> certify_power_regime(const ProxSequence& seq, double c, double gamma, double r,
                                                  PowerRegime regime, const DiscreteControls& controls = {});

/// Pairwise and limit distance bounds, confinement, minimality, slope and one-step
/// decay checks, the exponential bounds for finite alpha > 0 (pass NaN or inf to skip)
/// and, for power-family theta, the matching regime certificates.
std::vector<RateCertificate> certify_rates_discrete(const ProxSequence& seq, const ParameterFunction& pf,
                                                    const Point& x0, double r, double alpha,
                                                    const DiscreteControls& controls = {});

struct LimitDiagnostics {
  bool converged = false;
  bool inconclusive = false;
  double f_limit = std::numeric_limits<double>::quiet_NaN();
  double f_last = std::numeric_limits<double>::quiet_NaN();
  double continuity_gap = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> late_slopes;
  bool slopes_decay = false;
};

/// f-continuity at the limit and decay of the slope along the last iterates.
LimitDiagnostics limit_diagnostics(const ProxSequence& seq, const Functional& f, double tol = 1e-6);

struct RecursionRow {
  std::size_t k = 0;
  double observed = 0;
  double bound = 0;
  double margin = 0;
};

/// Equality sequence f_{k-1} - f_k = alpha f_k^delta solved per step, with the bound.
std::vector<RecursionRow> recursion_table(const RecursiveBoundParams& params, std::size_t k_max);

/// Root u >= 0 of u + alpha u^delta = prev.
double recursion_equality_step(double prev, double alpha, double delta);

}  // namespace klflow
