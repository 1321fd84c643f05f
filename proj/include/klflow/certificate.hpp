#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace klflow {

enum class CertificateKind {
  theta_distance,
  gamma_distance,
  eta_energy,
  exponential,
  power_family,
  improved_sqrt,
  discrete,
  confinement,
  limit_energy,
  condition,
  minimiser,
};

const char* to_string(CertificateKind kind);

/// Predicted bound curve against an observed curve on a common grid (times or step
/// indices). The margin is the minimum of bound - observed; the verdict is
/// margin >= -tol. Pairwise certificates store one row per checked pair.
struct RateCertificate {
  CertificateKind kind = CertificateKind::discrete;
  std::string label;
  std::vector<double> grid;
  std::vector<double> predicted;
  std::vector<double> observed;
  double margin = std::numeric_limits<double>::infinity();
  double tol = 1e-7;
  bool verdict = true;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  bool skipped = false;
  std::string note;

  void add(double x, double bound, double value);
  /// Recomputes margin and verdict from the stored rows.
  void finalize();
};

RateCertificate make_certificate(CertificateKind kind, std::string label, double tol = 1e-7);

/// A certificate that was not evaluated; it carries a note and a passing verdict.
RateCertificate skipped_certificate(CertificateKind kind, std::string label, std::string note);

bool all_pass(const std::vector<RateCertificate>& certs);

}  // namespace klflow
