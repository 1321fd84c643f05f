#pragma once

#include "klflow/certificate.hpp"
#include "klflow/core.hpp"
#include "klflow/parameter_function.hpp"
#include "klflow/slope.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace klflow {

/// Selection among tied steepest directions. positive/negative maximise/minimise the
/// coordinate sum; lexicographic takes the lexicographically smallest direction.
enum class BranchPolicy { positive_branch, negative_branch, lexicographic };

const char* to_string(BranchPolicy policy);
BranchPolicy branch_policy_from_string(const std::string& name);

struct FlowControls {
  double dt_max = 1e-3;
  double safety = 0.25;
  /// f <= extinction_tol counts as f = 0; the curve is constant afterwards.
  double extinction_tol = 1e-12;
  /// Relative gradient change across one step that counts as a gradient jump.
  double jump_ratio = 10;
  /// Time budget used when T = inf.
  double budget = 20;
  /// Length of the constant tail recorded after extinction or an equilibrium stop when
  /// T = inf. Tail samples carry slope 0.
  double tail = 1;
  BranchPolicy policy = BranchPolicy::positive_branch;
  SlopeSchedule schedule;
  double min_step = 1e-13;
  /// Euler step taken off a point where no gradient is available.
  double start_step = 1e-9;
  std::size_t max_samples = 4'000'000;
};

struct TrajectorySample {
  double t = 0;
  Point y;
  double f = 0;
  double slope = 0;
  double speed = 0;
  int segment = 0;
};

enum class FlowStop { horizon, extinction, equilibrium, step_underflow, sample_limit };

const char* to_string(FlowStop stop);

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double T = 0;
  bool infinite_budget = false;
  Point x0;
  /// Glue times T_1 < ... < T_K where a new segment starts.
  std::vector<double> segment_boundaries;
  std::optional<Point> limit_point;
  /// First time with f <= extinction_tol, or the final time when that never happens.
  double t_star = std::numeric_limits<double>::quiet_NaN();
  bool extinct = false;
  bool glued = false;
  bool partial = false;
  FlowStop stop = FlowStop::horizon;
  std::string diagnostic;

  int segment_count() const { return static_cast<int>(segment_boundaries.size()) + 1; }
  /// Linear interpolation in time between neighbouring samples.
  Point state_at(double t) const;
  double value_at(double t) const;
};

/// Curve of maximal slope from x0 on [0, T]. T = inf uses controls.budget with the
/// extinction stopping rule.
Trajectory integrate_maximal_slope(const Functional& f, const Point& x0, double T, const FlowControls& controls = {});

/// Recomputes the per-sample metric speeds from the stored points.
void recompute_speeds(Trajectory& traj);

struct EdeResidual {
  double t = 0;
  double value = 0;
};

struct EdeReport {
  std::vector<EdeResidual> residuals;
  double max_residual = 0;
  /// |-df/dt - speed^2| and |-df/dt - slope^2|, reported as their maximum per sample.
  std::vector<EdeResidual> equality_residuals;
  double max_equality_residual = 0;
  std::size_t skipped = 0;
};

/// Energy dissipation check by finite differences. Samples at segment ends, next to
/// glue events, near extinction and at an equilibrium stop are skipped.
EdeReport verify_ede(const Trajectory& traj, const Functional& f);

struct CertificateControls {
  double tol = 1e-7;
  /// Pairwise checks use at most this many evenly spread samples.
  std::size_t max_pair_samples = 500;
  double extinction_tol = 1e-12;
};

/// theta-distance, Gamma-distance, eta-energy, confinement and (for infinite budgets)
/// limit-energy certificates.
std::vector<RateCertificate> certify_rates_continuous(const Trajectory& traj, const ParameterFunction& pf,
                                                      const AuxiliaryFunctions& aux, const Point& x0, double r,
                                                      const CertificateControls& controls = {});

/// f(y_t) <= exp(-alpha t) f(x0) and d(y_t, y_T) <= r exp(-alpha t / 2).
std::vector<RateCertificate> certify_exponential(const Trajectory& traj, double alpha, double r,
                                                 const CertificateControls& controls = {});

/// Closed-form energy and distance bounds of the power family; for gamma > 1/2 also
/// the extinction-time bound.
std::vector<RateCertificate> certify_power_family(const Trajectory& traj, double c, double gamma, double r,
                                                  const CertificateControls& controls = {});

/// Improved distance bounds for gamma = 1/2 from time s to every sample time in
/// [s, min(t, t_star)]. The first certificate carries the sharper bound, the second
/// the bound in terms of f(x0) only.
std::vector<RateCertificate> improved_sqrt_distance_bound(const Trajectory& traj, double c, double s, double t,
                                                          const CertificateControls& controls = {});

struct GluedResult {
  Trajectory trajectory;
  std::vector<RateCertificate> certificates;
};

/// Concatenates segments (each one starting where the previous ended) and certifies
/// the glued curve. Segments whose time starts at 0 are shifted to follow their
/// predecessor. Throws std::invalid_argument on an endpoint mismatch above 1e-6.
GluedResult glue_trajectories(const std::vector<Trajectory>& segments, const ParameterFunction& pf,
                              const AuxiliaryFunctions& aux, const Point& x0, double r,
                              const CertificateControls& controls = {});

/// Splits a trajectory at its glue times into single-segment trajectories.
std::vector<Trajectory> split_segments(const Trajectory& traj);

}  // namespace klflow
