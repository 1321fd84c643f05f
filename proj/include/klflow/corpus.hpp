#pragma once

#include "klflow/core.hpp"
#include "klflow/flow.hpp"
#include "klflow/parameter_function.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace klflow {

/// A test functional with its known closed forms. Optional oracles are empty when no
/// closed form is available.
struct CorpusEntry {
  std::string id;
  Functional functional;
  /// Closed-form trajectory y_t from x0; the policy picks a branch where the flow is not unique.
  std::function<std::optional<Point>(const Point& x0, double t, BranchPolicy policy)> trajectory;
  /// Closed-form resolvent set J_tau(x).
  std::function<std::vector<Point>(const Point& x, double tau)> resolvent;
  /// alpha(x0, r); std::nullopt when the admissible set is empty or no closed form exists.
  std::function<std::optional<double>(const Point& x0, double r)> known_alpha;
  /// Parameter function for which the entry satisfies the slope inequality with equality
  /// or better near x0.
  std::function<std::optional<ParameterFunction>(const Point& x0)> matched_theta;
  /// Kinks and jumps in one dimension.
  std::vector<double> singular_points;
  std::string provenance;
};

CorpusEntry make_quadratic(double lambda, const Point& center);
CorpusEntry make_double_well(double lambda, double a);
CorpusEntry make_truncated_parabola(double x0_ref);
CorpusEntry make_staircase(double m, double eps);
CorpusEntry make_asymmetric_double_well(double lambda, double a, double eps);
/// |x|^p with theta(u) = u^{1/p}.
CorpusEntry make_power(double p);
/// theta^{-1}(x + eps) on [0, M), 0 on [M, inf), +inf for x < 0, for the power
/// theta (c / gamma) u^gamma.
CorpusEntry make_sharpness(double c, double gamma, double M, double eps);

struct CorpusId {
  std::string name;
  std::map<std::string, std::string> params;
};

/// Parses "name?key=value&key=value".
CorpusId parse_corpus_id(const std::string& id);

/// Builds an entry from a registry id. Throws std::invalid_argument on unknown names,
/// unknown keys or malformed values.
CorpusEntry make_corpus_entry(const std::string& id);

struct CorpusListing {
  std::string id;
  std::string provenance;
};

/// Registry ids with default parameters.
std::vector<CorpusListing> list_corpus();

struct BruteForceResult {
  Point point;
  double value = std::numeric_limits<double>::infinity();
  /// One representative per cluster of global minimisers, nearest to the reference point.
  std::vector<Point> minimisers;
  bool inconclusive = false;
};

/// Dense-grid argmin over the box [lo, hi]^n refined by golden-section in one
/// dimension. `point` is the minimiser representative nearest to `reference`.
BruteForceResult brute_force_minimiser(const Functional& f, double lo, double hi, std::size_t grid,
                                       const Point& reference);

}  // namespace klflow
