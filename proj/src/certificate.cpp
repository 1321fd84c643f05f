#include "klflow/certificate.hpp"

#include <algorithm>

namespace klflow {

const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::theta_distance: return "theta-distance";
    case CertificateKind::gamma_distance: return "gamma-distance";
    case CertificateKind::eta_energy: return "eta-energy";
    case CertificateKind::exponential: return "exponential";
    case CertificateKind::power_family: return "power-family";
    case CertificateKind::improved_sqrt: return "improved-sqrt";
    case CertificateKind::discrete: return "discrete";
    case CertificateKind::confinement: return "confinement";
    case CertificateKind::limit_energy: return "limit-energy";
    case CertificateKind::condition: return "condition";
    case CertificateKind::minimiser: return "minimiser";
  }
  return "?";
}

void RateCertificate::add(double x, double bound, double value) {
  grid.push_back(x);
  predicted.push_back(bound);
  observed.push_back(value);
}

void RateCertificate::finalize() {
  margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double b = predicted[i];
    const double v = observed[i];
    double m;
    if (std::isinf(b) && b > 0) {
      m = std::numeric_limits<double>::infinity();
    } else if (std::isnan(b) || std::isnan(v)) {
      m = -std::numeric_limits<double>::infinity();
    } else {
      m = b - v;
    }
    margin = std::min(margin, m);
  }
  verdict = margin >= -tol;
}

RateCertificate make_certificate(CertificateKind kind, std::string label, double tol) {
  RateCertificate c;
  c.kind = kind;
  c.label = std::move(label);
  c.tol = tol;
  return c;
}

RateCertificate skipped_certificate(CertificateKind kind, std::string label, std::string note) {
  RateCertificate c = make_certificate(kind, std::move(label));
  c.skipped = true;
  c.note = std::move(note);
  return c;
}

bool all_pass(const std::vector<RateCertificate>& certs) {
  return std::all_of(certs.begin(), certs.end(), [](const RateCertificate& c) { return c.verdict; });
}

}  // namespace klflow
