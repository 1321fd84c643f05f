#include "klflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace klflow {

namespace {

std::vector<std::size_t> spread_indices(std::size_t n, std::size_t max_count) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  if (n <= max_count || max_count < 2) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  for (std::size_t k = 0; k < max_count; ++k) {
    const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                                                         static_cast<double>(max_count - 1)));
    if (idx.empty() || idx.back() != i) idx.push_back(i);
  }
  return idx;
}

double effective_t_star(const Trajectory& traj) {
  if (traj.samples.empty()) return 0;
  return std::isnan(traj.t_star) ? traj.samples.back().t : traj.t_star;
}

void require_samples(const Trajectory& traj) {
  if (traj.samples.empty()) throw std::invalid_argument("certificate needs a non-empty trajectory");
}

}  // namespace

std::vector<RateCertificate> certify_rates_continuous(const Trajectory& traj, const ParameterFunction& pf,
                                                      const AuxiliaryFunctions& aux, const Point& x0, double r,
                                                      const CertificateControls& controls) {
  require_samples(traj);
  if (!(r > 0)) throw std::invalid_argument("certificates need r > 0");
  const auto& S = traj.samples;
  const double f0 = S.front().f;
  const double t_star = effective_t_star(traj);
  std::vector<RateCertificate> out;

  {
    auto cert = make_certificate(CertificateKind::theta_distance, "theta-distance", controls.tol);
    const auto idx = spread_indices(S.size(), controls.max_pair_samples);
    std::vector<double> th(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) th[a] = pf(S[idx[a]].f);
    for (std::size_t a = 0; a + 1 < idx.size(); ++a) {
      double worst = std::numeric_limits<double>::infinity();
      double wb = 0;
      double wo = 0;
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        const double bound = th[a] - th[b];
        const double obs = distance(S[idx[a]].y, S[idx[b]].y);
        if (bound - obs < worst) {
          worst = bound - obs;
          wb = bound;
          wo = obs;
        }
      }
      cert.add(S[idx[a]].t, wb, wo);
    }
    cert.t_star = t_star;
    cert.finalize();
    out.push_back(std::move(cert));
  }

  if (!traj.limit_point) {
    out.push_back(skipped_certificate(CertificateKind::gamma_distance, "gamma-distance", "no limit point"));
  } else if (!(r < pf.at_infinity())) {
    out.push_back(skipped_certificate(CertificateKind::gamma_distance, "gamma-distance", "r outside the range of theta"));
  } else {
    auto cert = make_certificate(CertificateKind::gamma_distance, "gamma-distance", controls.tol);
    const double gamma_r = aux.gamma(r);
    for (const auto& s : S) {
      cert.add(s.t, aux.gamma_inverse(gamma_r - s.t), distance(s.y, *traj.limit_point));
    }
    cert.t_star = t_star;
    cert.finalize();
    out.push_back(std::move(cert));
  }

  {
    auto cert = make_certificate(CertificateKind::eta_energy, "eta-energy", controls.tol);
    if (f0 > 0) {
      const double eta0 = aux.eta(f0);
      for (const auto& s : S) {
        if (s.t > t_star) break;
        cert.add(s.t, aux.eta_inverse(eta0 - s.t), s.f);
      }
    } else {
      cert.note = "equilibrium start";
    }
    cert.t_star = t_star;
    cert.finalize();
    out.push_back(std::move(cert));
  }

  {
    auto cert = make_certificate(CertificateKind::confinement, "confinement", 1e-9);
    bool strict = true;
    for (const auto& s : S) {
      const double d = distance(s.y, x0);
      cert.add(s.t, r, d);
      if (s.f > controls.extinction_tol && !(d < r)) strict = false;
    }
    cert.t_star = t_star;
    cert.finalize();
    if (!strict) {
      cert.verdict = false;
      cert.note = "sample with f > 0 on or outside the sphere of radius r";
    }
    out.push_back(std::move(cert));
  }

  if (traj.infinite_budget) {
    auto cert = make_certificate(CertificateKind::limit_energy, "limit-energy", controls.tol);
    cert.add(S.back().t, 0.0, S.back().f);
    cert.t_star = t_star;
    cert.finalize();
    out.push_back(std::move(cert));
  }
  return out;
}

std::vector<RateCertificate> certify_exponential(const Trajectory& traj, double alpha, double r,
                                                 const CertificateControls& controls) {
  require_samples(traj);
  if (!(alpha > 0)) throw std::invalid_argument("exponential certificate needs alpha > 0");
  const auto& S = traj.samples;
  const double f0 = S.front().f;
  std::vector<RateCertificate> out;
  auto energy = make_certificate(CertificateKind::exponential, "exponential-energy", controls.tol);
  for (const auto& s : S) energy.add(s.t, std::exp(-alpha * s.t) * f0, s.f);
  energy.t_star = effective_t_star(traj);
  energy.finalize();
  out.push_back(std::move(energy));
  if (!traj.limit_point) {
    out.push_back(skipped_certificate(CertificateKind::exponential, "exponential-distance", "no limit point"));
    return out;
  }
  auto dist = make_certificate(CertificateKind::exponential, "exponential-distance", controls.tol);
  for (const auto& s : S) dist.add(s.t, r * std::exp(-alpha * s.t / 2), distance(s.y, *traj.limit_point));
  dist.t_star = effective_t_star(traj);
  dist.finalize();
  out.push_back(std::move(dist));
  return out;
}

std::vector<RateCertificate> certify_power_family(const Trajectory& traj, double c, double gamma, double r,
                                                  const CertificateControls& controls) {
  require_samples(traj);
  if (!(c > 0) || !(gamma > 0) || gamma > 1) throw std::invalid_argument("power family needs c > 0, gamma in (0,1]");
  const auto& S = traj.samples;
  const double f0 = S.front().f;
  const double c2 = c * c;
  const double e = 2 * gamma - 1;
  const double t_star = effective_t_star(traj);
  std::vector<RateCertificate> out;

  auto energy_bound = [&](double t) {
    if (e == 0) return f0 * std::exp(-t / c2);
    const double base = std::pow(f0, e) - e * t / c2;
    if (base <= 0) return 0.0;
    return std::pow(base, 1 / e);
  };
  auto distance_bound = [&](double t) {
    if (e == 0) return r * std::exp(-t / (2 * c2));
    const double base = std::pow(gamma * r / c, e / gamma) - e * t / c2;
    if (base <= 0) return 0.0;
    return c / gamma * std::pow(base, gamma / e);
  };

  auto energy = make_certificate(CertificateKind::power_family, "power-energy", controls.tol);
  for (const auto& s : S) energy.add(s.t, energy_bound(s.t), s.f);
  energy.t_star = t_star;
  energy.finalize();
  out.push_back(std::move(energy));

  if (traj.limit_point) {
    auto dist = make_certificate(CertificateKind::power_family, "power-distance", controls.tol);
    for (const auto& s : S) {
      if (s.t > t_star) break;
      dist.add(s.t, distance_bound(s.t), distance(s.y, *traj.limit_point));
    }
    dist.t_star = t_star;
    dist.finalize();
    out.push_back(std::move(dist));
  } else {
    out.push_back(skipped_certificate(CertificateKind::power_family, "power-distance", "no limit point"));
  }

  if (e > 0) {
    auto ext = make_certificate(CertificateKind::power_family, "power-extinction-time", controls.tol);
    const double bound = c2 / e * std::pow(f0, e);
    ext.add(0.0, bound, traj.extinct ? t_star : S.back().t);
    if (!traj.extinct) ext.note = "no extinction observed within the horizon";
    ext.t_star = t_star;
    ext.finalize();
    if (!traj.extinct && S.back().t < bound) {
      ext.verdict = true;
      ext.note = "horizon ends before the extinction bound";
    }
    out.push_back(std::move(ext));
  }
  return out;
}

std::vector<RateCertificate> improved_sqrt_distance_bound(const Trajectory& traj, double c, double s, double t,
                                                          const CertificateControls& controls) {
  require_samples(traj);
  if (!(c > 0)) throw std::invalid_argument("improved bound needs c > 0");
  if (!(s <= t)) throw std::invalid_argument("improved bound needs s <= t");
  const auto& S = traj.samples;
  const double f0 = S.front().f;
  const double c2 = c * c;
  const double upper = traj.extinct ? std::min(t, traj.t_star) : t;
  const Point ys = traj.state_at(s);
  const double fs = traj.value_at(s);
  auto sharp = make_certificate(CertificateKind::improved_sqrt, "improved-sqrt", controls.tol);
  auto coarse = make_certificate(CertificateKind::improved_sqrt, "improved-sqrt-f0", controls.tol);
  if (upper < t) {
    sharp.note = coarse.note = "restricted to [s, t_star]";
  }
  auto add_row = [&](double u, const Point& yu, double fu) {
    const double a = std::exp(-s / (2 * c2)) - std::exp(-u / (2 * c2));
    const double b1 = 4 * c2 * a * std::sqrt(f0) * (std::sqrt(fs) - std::sqrt(fu));
    const double b2 = 4 * c2 * std::exp(-s / (2 * c2)) * a * f0;
    const double obs = distance(yu, ys);
    sharp.add(u, std::sqrt(std::max(b1, 0.0)), obs);
    coarse.add(u, std::sqrt(std::max(b2, 0.0)), obs);
  };
  add_row(s, ys, fs);
  for (const auto& smp : S) {
    if (smp.t <= s) continue;
    if (smp.t > upper) break;
    if (!(smp.f > controls.extinction_tol)) break;
    add_row(smp.t, smp.y, smp.f);
  }
  sharp.t_star = coarse.t_star = effective_t_star(traj);
  sharp.finalize();
  coarse.finalize();
  return {sharp, coarse};
}

}  // namespace klflow
