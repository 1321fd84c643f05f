#include "klflow/prox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klflow {

const char* to_string(PowerRegime regime) {
  switch (regime) {
    case PowerRegime::finite_termination: return "finite-termination";
    case PowerRegime::superlinear: return "superlinear";
    case PowerRegime::exponential: return "exponential";
    case PowerRegime::polynomial: return "polynomial";
  }
  return "?";
}

PowerRegime regime_for_gamma(double gamma) {
  if (!(gamma > 0) || gamma > 1) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (gamma == 1) return PowerRegime::finite_termination;
  if (gamma > 0.5) return PowerRegime::superlinear;
  if (gamma == 0.5) return PowerRegime::exponential;
  return PowerRegime::polynomial;
}

namespace {

std::vector<std::size_t> spread(std::size_t n, std::size_t max_count) {
  std::vector<std::size_t> idx;
  if (n <= max_count || max_count < 2) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t k = 0; k < max_count; ++k) {
    const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                                                         static_cast<double>(max_count - 1)));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

double finalize_into(std::vector<RateCertificate>& out, RateCertificate cert) {
  cert.finalize();
  const double m = cert.margin;
  out.push_back(std::move(cert));
  return m;
}

}  // namespace

std::vector<RateCertificate> certify_power_regime(const ProxSequence& seq, double c, double gamma, double r,
                                                  PowerRegime regime, const DiscreteControls& controls) {
  if (!(c > 0) || !(r > 0)) throw std::invalid_argument("power regime needs c > 0 and r > 0");
  if (regime_for_gamma(gamma) != regime) {
    throw std::invalid_argument(std::string("regime ") + to_string(regime) + " does not match gamma");
  }
  if (seq.taus.empty() && seq.f0 > 0) throw std::invalid_argument("power regime needs at least one step");
  if (!seq.constant_tau()) throw std::invalid_argument("power regime bounds need a constant step size");
  std::vector<RateCertificate> out;
  const double f0 = seq.f0;
  const double tau = seq.taus.empty() ? 1.0 : seq.taus.front();
  const std::size_t n = seq.size();

  if (regime == PowerRegime::finite_termination) {
    auto cert = make_certificate(CertificateKind::discrete, "termination-step", 0.0);
    const double bound = std::ceil(c * r / tau);
    double observed = 0;
    if (f0 > 0) {
      if (seq.terminated_at) {
        observed = static_cast<double>(*seq.terminated_at);
      } else {
        observed = static_cast<double>(n - 1);
        cert.note = "no termination observed";
      }
    }
    cert.add(0.0, bound, observed);
    finalize_into(out, std::move(cert));
    if (f0 > 0 && !seq.terminated_at && static_cast<double>(n - 1) < bound) {
      out.back().verdict = true;
      out.back().note = "sequence shorter than the termination bound";
    }
    return out;
  }

  auto cert = make_certificate(CertificateKind::discrete, std::string("regime-") + to_string(regime), controls.tol);
  if (f0 <= 0) {
    cert.note = "equilibrium start";
    cert.add(0.0, 0.0, 0.0);
    finalize_into(out, std::move(cert));
    return out;
  }
  const auto params = make_recursive_bound_params(f0, tau / (c * c), 2 - 2 * gamma);
  for (std::size_t k = 0; k < n; ++k) {
    cert.add(static_cast<double>(k), recursive_bound(params, static_cast<double>(k)).value, seq.value(k));
  }
  if (regime == PowerRegime::superlinear) {
    cert.note = "k0 = " + std::to_string(params.k0);
  } else if (regime == PowerRegime::polynomial) {
    cert.note = "C1 = " + std::to_string(params.C);
  }
  finalize_into(out, std::move(cert));
  return out;
}

std::vector<RateCertificate> certify_rates_discrete(const ProxSequence& seq, const ParameterFunction& pf,
                                                    const Point& x0, double r, double alpha,
                                                    const DiscreteControls& controls) {
  if (!(r > 0)) throw std::invalid_argument("certificates need r > 0");
  std::vector<RateCertificate> out;
  const std::size_t n = seq.size();

  {
    auto cert = make_certificate(CertificateKind::theta_distance, "prox-theta-distance", controls.tol);
    const auto idx = spread(n, controls.max_pair_samples);
    std::vector<double> th(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) th[a] = pf(seq.value(idx[a]));
    for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
      double worst = std::numeric_limits<double>::infinity();
      double wb = 0;
      double wo = 0;
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const double bound = th[a] - th[b];
        const double obs = distance(seq.iterate(idx[a]), seq.iterate(idx[b]));
        if (bound - obs < worst) {
          worst = bound - obs;
          wb = bound;
          wo = obs;
        }
      }
      cert.add(static_cast<double>(idx[a]), wb, wo);
    }
    finalize_into(out, std::move(cert));
  }

  if (seq.limit_point) {
    auto cert = make_certificate(CertificateKind::theta_distance, "prox-limit-distance", controls.tol);
    for (std::size_t k = 0; k < n; ++k) {
      cert.add(static_cast<double>(k), pf(seq.value(k)), distance(seq.iterate(k), *seq.limit_point));
    }
    finalize_into(out, std::move(cert));
  } else {
    out.push_back(skipped_certificate(CertificateKind::theta_distance, "prox-limit-distance", "no limit point"));
  }

  {
    auto cert = make_certificate(CertificateKind::confinement, "prox-confinement", 1e-9);
    bool strict = true;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = distance(seq.iterate(k), x0);
      cert.add(static_cast<double>(k), r, d);
      if (!(d < r)) strict = false;
    }
    cert.finalize();
    if (!strict) {
      cert.verdict = false;
      cert.note = "iterate on or outside the sphere of radius r";
    }
    out.push_back(std::move(cert));
  }

  {
    auto mono = make_certificate(CertificateKind::discrete, "prox-monotone", controls.tol);
    auto minimal = make_certificate(CertificateKind::discrete, "prox-minimality", controls.minimality_tol);
    auto slope = make_certificate(CertificateKind::discrete, "prox-slope-bound", controls.tol);
    auto decay = make_certificate(CertificateKind::discrete, "prox-one-step-decay", controls.tol);
    slope.note = "slope estimates carry a 2% relative allowance";
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      const auto& s = seq.steps[k];
      const double kk = static_cast<double>(k + 1);
      mono.add(kk, s.f_from, s.f_to);
      minimal.add(kk, s.f_from, s.f_to + s.dist * s.dist / (2 * s.tau));
      slope.add(kk, s.dist, s.tau * s.slope_to / 1.02);
      if (s.f_to > 0) {
        const double d = pf.derivative(s.f_to);
        decay.add(kk, s.f_from - s.f_to, s.tau / (d * d));
      }
    }
    if (!pf.is_power()) decay.note = "requires a concave parameter function";
    if (seq.flagged) {
      mono.note = minimal.note = "sequence contains non-certified resolvent steps";
    }
    finalize_into(out, std::move(mono));
    finalize_into(out, std::move(minimal));
    finalize_into(out, std::move(slope));
    finalize_into(out, std::move(decay));
  }

  if (std::isfinite(alpha) && alpha > 0) {
    auto energy = make_certificate(CertificateKind::exponential, "prox-exponential-energy", controls.tol);
    auto dist = make_certificate(CertificateKind::exponential, "prox-exponential-distance", controls.tol);
    double factor = 1;
    for (std::size_t k = 0; k < n; ++k) {
      if (k > 0) factor /= 1 + alpha * seq.taus[k - 1];
      energy.add(static_cast<double>(k), factor * seq.f0, seq.value(k));
      if (seq.limit_point) {
        dist.add(static_cast<double>(k), std::sqrt(factor) * r, distance(seq.iterate(k), *seq.limit_point));
      }
    }
    finalize_into(out, std::move(energy));
    if (seq.limit_point) {
      finalize_into(out, std::move(dist));
    } else {
      out.push_back(skipped_certificate(CertificateKind::exponential, "prox-exponential-distance", "no limit point"));
    }
  }

  if (pf.is_power() && seq.constant_tau() && !seq.taus.empty()) {
    const auto regime = certify_power_regime(seq, pf.c, pf.gamma, r, regime_for_gamma(pf.gamma), controls);
    out.insert(out.end(), regime.begin(), regime.end());
  }
  return out;
}

}  // namespace klflow
