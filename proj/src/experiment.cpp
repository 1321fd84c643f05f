#include "klflow/experiment.hpp"

#include "klflow/csv.hpp"
#include "klflow/sampling.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <future>

namespace klflow {

using nlohmann::json;

std::vector<std::string> RunReport::failing_certificates() const {
  std::vector<std::string> out;
  for (const auto& c : certificates) {
    if (!c.verdict) out.push_back(c.label);
  }
  return out;
}

std::filesystem::path output_root() {
  const char* env = std::getenv("KLFLOW_OUTPUT_ROOT");
  if (env && *env) return env;
  return "klflow-out";
}

namespace {

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json config_json(const ExperimentConfig& c) {
  json j;
  j["id"] = c.id;
  j["functional"] = c.functional;
  j["mode"] = to_string(c.mode);
  j["x0"] = std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size());
  j["r"] = c.r;
  j["theta"] = {{"kind", c.theta.kind}, {"c", c.theta.c}, {"gamma", c.theta.gamma}, {"alpha", c.theta.alpha}};
  j["alpha"] = c.alpha;
  j["require"] = c.require;
  j["flow"] = {{"horizon", finite_or_string(c.horizon)},
               {"dt_max", c.flow.dt_max},
               {"safety", c.flow.safety},
               {"budget", c.flow.budget},
               {"policy", to_string(c.flow.policy)}};
  j["prox"] = {{"tau", c.tau},
               {"taus", c.taus},
               {"max_steps", c.max_steps},
               {"policy", to_string(c.prox.policy)},
               {"f_stop", c.prox.f_stop},
               {"de_giorgi", c.prox.compute_de_giorgi}};
  if (c.recursion) {
    j["recursion"] = {{"f0", c.recursion->f0},
                      {"alpha", c.recursion->alpha},
                      {"delta", c.recursion->delta},
                      {"k_max", c.recursion->k_max}};
  }
  j["tolerances"] = {{"certificate", c.certificate_tol},
                     {"slope_rel", c.slope_rel_tol},
                     {"ede", c.ede_tol},
                     {"minimiser", c.minimiser_tol}};
  j["seed"] = c.seed;
  j["sampling_seed"] = kSamplingSeed;
  j["output_dir"] = c.output_dir;
  j["expect_failure"] = c.expect_failure;
  return j;
}

json point_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

json condition_json(const ConditionReport& r) {
  json j;
  j["condition"] = to_string(r.condition);
  j["holds"] = r.holds;
  j["alpha_estimate"] = finite_or_string(r.alpha_estimate);
  j["r"] = r.r;
  j["f0"] = r.f0;
  j["theta_budget"] = finite_or_string(r.theta_budget);
  j["rhs"] = finite_or_string(r.rhs);
  j["min_slope_product"] = finite_or_string(r.min_slope_product);
  j["budget_ok"] = r.budget_ok;
  j["slope_ok"] = r.slope_ok;
  j["equilibrium_start"] = r.equilibrium_start;
  j["empty_admissible"] = r.empty_admissible;
  j["samples"] = r.samples;
  if (r.worst_witness.found) {
    j["witness"] = {{"x", point_json(r.worst_witness.x)},
                    {"f", r.worst_witness.f},
                    {"slope", r.worst_witness.slope},
                    {"margin", finite_or_string(r.worst_witness.margin)}};
  }
  return j;
}

json certificate_json(const RateCertificate& c) {
  json j;
  j["label"] = c.label;
  j["kind"] = to_string(c.kind);
  j["verdict"] = c.verdict;
  j["margin"] = finite_or_string(c.margin);
  j["tol"] = c.tol;
  j["rows"] = c.grid.size();
  j["skipped"] = c.skipped;
  if (!std::isnan(c.t_star)) j["t_star"] = c.t_star;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

ConditionKind condition_kind(const std::string& s) {
  if (s == "A") return ConditionKind::A;
  if (s == "A'") return ConditionKind::A_prime;
  if (s == "C") return ConditionKind::C;
  return ConditionKind::C_prime;
}

RateCertificate condition_certificate(const ConditionReport& r) {
  auto cert = make_certificate(CertificateKind::condition, std::string("condition-") + to_string(r.condition), 0.0);
  const bool is_c = r.condition == ConditionKind::C || r.condition == ConditionKind::C_prime;
  if (r.equilibrium_start) {
    cert.note = "equilibrium start";
  } else if (is_c) {
    cert.add(0.0, r.alpha_estimate, r.rhs);
  } else {
    cert.add(0.0, r.r, r.r - r.theta_budget);
    if (!std::isnan(r.min_slope_product)) cert.add(1.0, r.min_slope_product, 1.0);
  }
  cert.finalize();
  cert.verdict = r.holds;
  if (r.holds || r.equilibrium_start) return cert;
  std::string witness;
  if (r.worst_witness.found) {
    std::string x;
    for (Eigen::Index i = 0; i < r.worst_witness.x.size(); ++i) x += (i ? "," : "") + format_double(r.worst_witness.x(i));
    witness = "witness x=(" + x + ") f=" + format_double(r.worst_witness.f) +
              " slope=" + format_double(r.worst_witness.slope);
  }
  if (is_c) {
    cert.note = "alpha estimate " + format_double(r.alpha_estimate) + " against 4 f(x0) / r^2 = " + format_double(r.rhs);
    if (!witness.empty()) cert.note += "; " + witness;
  } else if (!r.budget_ok) {
    cert.note = "budget inequality fails by " + format_double(-r.theta_budget);
  } else {
    cert.note = witness;
  }
  return cert;
}

ParameterFunction resolve_theta(const ExperimentConfig& c, const CorpusEntry& e) {
  if (c.theta.kind == "power") return make_power_theta(c.theta.c, c.theta.gamma);
  if (c.theta.kind == "alpha") return make_alpha_theta(c.theta.alpha);
  const auto pf = e.matched_theta ? e.matched_theta(c.x0) : std::nullopt;
  if (!pf) throw ConfigError("no matched theta for " + e.id + " at this x0; give theta explicitly");
  return *pf;
}

double resolve_alpha(const ExperimentConfig& c, const CorpusEntry& e) {
  if (c.alpha == "none") return std::numeric_limits<double>::quiet_NaN();
  if (c.alpha == "known") {
    const auto a = e.known_alpha ? e.known_alpha(c.x0, c.r) : std::nullopt;
    return a ? *a : std::numeric_limits<double>::quiet_NaN();
  }
  return std::stod(c.alpha);
}

ConditionControls condition_controls(const ExperimentConfig& c) {
  ConditionControls cc;
  cc.sample_count = c.condition_samples;
  return cc;
}

RateCertificate minimiser_certificate(const ExperimentConfig& c, const CorpusEntry& e, const ParameterFunction& pf) {
  const Functional& f = e.functional;
  const double bound = pf(f(c.x0));
  const double half = 1.5 * bound + 1;
  double lo = c.x0.minCoeff() - half;
  double hi = c.x0.maxCoeff() + half;
  const auto bf = brute_force_minimiser(f, lo, hi, f.dimension == 1 ? 20001 : 40000, c.x0);
  auto cert = make_certificate(CertificateKind::minimiser, "minimiser-distance", 0.0);
  if (bf.point.size() == 0) {
    cert.note = "no minimiser found in the scan box";
    cert.finalize();
    cert.verdict = false;
    return cert;
  }
  cert.add(0.0, bound + c.minimiser_tol, distance(bf.point, c.x0));
  cert.finalize();
  if (bf.inconclusive) {
    cert.verdict = false;
    cert.note = "scan minimum on the box boundary";
  }
  return cert;
}

void append(std::vector<RateCertificate>& out, std::vector<RateCertificate> more, const std::string& prefix = "") {
  for (auto& c : more) {
    if (!prefix.empty()) c.label = prefix + c.label;
    out.push_back(std::move(c));
  }
}

struct Context {
  const ExperimentConfig& config;
  RunReport& report;
  std::filesystem::path dir;
  CorpusEntry entry;
};

void record_file(Context& ctx, const std::filesystem::path& path, const std::string& text) {
  write_text(path, text);
  ctx.report.files.push_back(std::filesystem::relative(path, ctx.dir).generic_string());
}

void run_condition(Context& ctx) {
  const auto& c = ctx.config;
  const auto kind = condition_kind(c.require);
  ConditionReport rep;
  if (kind == ConditionKind::C || kind == ConditionKind::C_prime) {
    rep = check_condition_C(ctx.entry.functional, c.x0, c.r, kind, condition_controls(c));
  } else {
    rep = check_condition_A(ctx.entry.functional, resolve_theta(c, ctx.entry), c.x0, c.r, kind, condition_controls(c));
  }
  ctx.report.certificates.push_back(condition_certificate(rep));
  ctx.report.condition = rep;
}

void run_flow(Context& ctx) {
  const auto& c = ctx.config;
  const Functional& f = ctx.entry.functional;
  const auto pf = resolve_theta(c, ctx.entry);
  const auto aux = make_auxiliary(pf);
  const auto condA = check_condition_A(f, pf, c.x0, c.r, ConditionKind::A, condition_controls(c));
  ctx.report.certificates.push_back(condition_certificate(condA));
  if (!ctx.report.condition) ctx.report.condition = condA;

  const Trajectory traj = integrate_maximal_slope(f, c.x0, c.horizon, c.flow);
  if (!traj.diagnostic.empty()) ctx.report.diagnostics.push_back("flow: " + traj.diagnostic);
  ctx.report.diagnostics.push_back(std::string("flow stop: ") + to_string(traj.stop));
  if (traj.partial) ctx.report.diagnostics.push_back("flow: partial trajectory");

  CertificateControls cc;
  cc.tol = c.certificate_tol;
  cc.extinction_tol = c.flow.extinction_tol;
  if (traj.segment_count() > 1) {
    auto glued = glue_trajectories(split_segments(traj), pf, aux, c.x0, c.r, cc);
    append(ctx.report.certificates, std::move(glued.certificates));
    std::string times;
    for (double t : traj.segment_boundaries) times += (times.empty() ? "" : ",") + format_double(t);
    ctx.report.diagnostics.push_back("flow: glue times " + times);
  } else {
    append(ctx.report.certificates, certify_rates_continuous(traj, pf, aux, c.x0, c.r, cc));
  }
  const double alpha = resolve_alpha(c, ctx.entry);
  if (std::isfinite(alpha) && alpha > 0) append(ctx.report.certificates, certify_exponential(traj, alpha, c.r, cc));
  if (pf.is_power()) append(ctx.report.certificates, certify_power_family(traj, pf.c, pf.gamma, c.r, cc));
  if (c.sqrt_s && pf.is_power() && pf.gamma == 0.5) {
    append(ctx.report.certificates, improved_sqrt_distance_bound(traj, pf.c, *c.sqrt_s, *c.sqrt_t, cc));
  }

  const auto ede = verify_ede(traj, f);
  auto ec = make_certificate(CertificateKind::discrete, "ede-residual", 0.0);
  for (const auto& r : ede.residuals) ec.add(r.t, c.ede_tol, r.value);
  ec.note = "max residual " + format_double(ede.max_residual) + ", skipped " + std::to_string(ede.skipped);
  ec.finalize();
  ctx.report.certificates.push_back(std::move(ec));

  if (c.minimiser_check) {
    const auto condAp = check_condition_A(f, pf, c.x0, c.r, ConditionKind::A_prime, condition_controls(c));
    if (condAp.holds && !condAp.equilibrium_start) ctx.report.certificates.push_back(minimiser_certificate(c, ctx.entry, pf));
  }
  record_file(ctx, ctx.dir / "trajectory.csv", trajectory_csv(traj));
}

void run_prox(Context& ctx) {
  const auto& c = ctx.config;
  const Functional& f = ctx.entry.functional;
  const auto pf = resolve_theta(c, ctx.entry);
  const auto condAp = check_condition_A(f, pf, c.x0, c.r, ConditionKind::A_prime, condition_controls(c));
  ctx.report.certificates.push_back(condition_certificate(condAp));
  if (!ctx.report.condition) ctx.report.condition = condAp;

  const ProxSequence seq = c.taus.empty() ? run_prox_sequence(f, c.x0, c.tau, c.max_steps, c.prox)
                                          : run_prox_sequence(f, c.x0, c.taus, c.prox);
  ctx.report.diagnostics.push_back("prox stop: " + seq.stop_reason);
  if (seq.terminated_at) ctx.report.diagnostics.push_back("prox: terminated at step " + std::to_string(*seq.terminated_at));
  if (seq.flagged) ctx.report.diagnostics.push_back("prox: sequence contains non-certified resolvent steps");

  DiscreteControls dc;
  dc.tol = c.certificate_tol;
  append(ctx.report.certificates, certify_rates_discrete(seq, pf, c.x0, c.r, resolve_alpha(c, ctx.entry), dc));

  if (c.prox.compute_de_giorgi) {
    auto dg = make_certificate(CertificateKind::discrete, "de-giorgi-residual", 0.0);
    for (std::size_t k = 0; k < seq.steps.size(); ++k) {
      dg.add(static_cast<double>(k + 1), 1e-6 * std::max(1.0, seq.steps[k].f_from), seq.steps[k].de_giorgi_residual);
    }
    dg.finalize();
    ctx.report.certificates.push_back(std::move(dg));
  }

  const auto ld = limit_diagnostics(seq, f);
  if (ld.inconclusive) {
    ctx.report.diagnostics.push_back("prox limit: inconclusive");
  } else {
    ctx.report.diagnostics.push_back("prox limit: f gap " + format_double(ld.continuity_gap) +
                                     (ld.slopes_decay ? ", slopes decay" : ", slopes not yet below tol"));
  }
  if (c.minimiser_check && condAp.holds && !condAp.equilibrium_start) {
    ctx.report.certificates.push_back(minimiser_certificate(c, ctx.entry, pf));
  }
  record_file(ctx, ctx.dir / "sequence.csv", sequence_csv(seq));
}

void run_recursion(Context& ctx) {
  const auto& s = *ctx.config.recursion;
  const auto params = make_recursive_bound_params(s.f0, s.alpha, s.delta);
  const auto rows = recursion_table(params, s.k_max);
  auto cert = make_certificate(CertificateKind::discrete, "recursion", ctx.config.certificate_tol);
  for (const auto& r : rows) cert.add(static_cast<double>(r.k), r.bound, r.observed);
  if (s.delta > 1) cert.note = "C = " + format_double(params.C);
  if (s.delta < 1) cert.note = "k0 = " + format_double(params.k0);
  cert.finalize();
  ctx.report.certificates.push_back(std::move(cert));
  record_file(ctx, ctx.dir / "recursion.csv", recursion_csv(rows));
}

}  // namespace

std::string report_json(const RunReport& r) {
  json j;
  j["config"] = config_json(r.config);
  if (r.condition) j["condition"] = condition_json(*r.condition);
  j["certificates"] = json::array();
  for (const auto& c : r.certificates) j["certificates"].push_back(certificate_json(c));
  j["files"] = r.files;
  j["diagnostics"] = r.diagnostics;
  j["wall_seconds"] = r.wall_seconds;
  j["verdict"] = r.verdict ? "pass" : "fail";
  j["failing"] = r.failing_certificates();
  j["expect_failure"] = r.config.expect_failure;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2);
}

RunReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = config;
  report.config_echo = config_json(config).dump();
  Context ctx{config, report, output_root() / config.output_dir, {}};
  std::filesystem::create_directories(ctx.dir);
  try {
    ctx.entry = make_corpus_entry(config.functional);
    switch (config.mode) {
      case RunMode::condition: run_condition(ctx); break;
      case RunMode::flow: run_flow(ctx); break;
      case RunMode::prox: run_prox(ctx); break;
      case RunMode::recursion: run_recursion(ctx); break;
      case RunMode::all:
        run_condition(ctx);
        run_flow(ctx);
        run_prox(ctx);
        if (config.recursion) run_recursion(ctx);
        break;
    }
    if (!report.certificates.empty()) {
      for (const auto& p : emit_plot_data(report.certificates, ctx.dir / "plots")) {
        report.files.push_back(std::filesystem::relative(p, ctx.dir).generic_string());
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report.error = e.what();
  }
  report.verdict = report.error.empty() && !report.certificates.empty() && all_pass(report.certificates);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(ctx.dir / "report.json", report_json(report));
  return report;
}

SuiteReport run_suite(const std::vector<ExperimentConfig>& manifest) {
  if (manifest.empty()) throw ConfigError("suite needs a non-empty manifest");
  for (const auto& c : manifest) validate_config(c);
  std::vector<std::future<RunReport>> futures;
  futures.reserve(manifest.size());
  for (const auto& c : manifest) {
    futures.push_back(std::async(std::launch::async, [c] { return run_experiment(c); }));
  }
  SuiteReport out;
  for (auto& fut : futures) out.runs.push_back(fut.get());
  std::sort(out.runs.begin(), out.runs.end(),
            [](const RunReport& a, const RunReport& b) { return a.config.id < b.config.id; });
  for (const auto& r : out.runs) {
    if (r.verdict) continue;
    out.failing_ids.push_back(r.config.id);
    if (r.config.expect_failure) out.expected_failures.push_back(r.config.id);
  }
  out.verdict = out.failing_ids.empty();
  write_text(output_root() / "suite_report.json", suite_json(out));
  return out;
}

std::string suite_json(const SuiteReport& s) {
  json j;
  j["verdict"] = s.verdict ? "pass" : "fail";
  j["failing_ids"] = s.failing_ids;
  j["designed_failures"] = s.expected_failures;
  j["runs"] = json::array();
  for (const auto& r : s.runs) {
    j["runs"].push_back({{"id", r.config.id},
                         {"verdict", r.verdict ? "pass" : "fail"},
                         {"failing", r.failing_certificates()},
                         {"expect_failure", r.config.expect_failure},
                         {"output_dir", r.config.output_dir}});
  }
  return j.dump(2);
}

}  // namespace klflow
