#pragma once

#include "klflow/condition.hpp"
#include "klflow/corpus.hpp"
#include "klflow/flow.hpp"
#include "klflow/prox.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace klflow {

/// Raised for unreadable or invalid configuration files; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { flow, prox, condition, recursion, all };

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

struct ThetaSpec {
  /// "matched" (the corpus entry's own theta), "power" or "alpha".
  std::string kind = "matched";
  double c = 1;
  double gamma = 0.5;
  double alpha = 1;
};

struct RecursionSpec {
  double f0 = 1;
  double alpha = 1;
  double delta = 1;
  std::size_t k_max = 100;
};

struct ExperimentConfig {
  std::string id;
  std::string functional;
  RunMode mode = RunMode::flow;
  Point x0;
  double r = 1;
  ThetaSpec theta;
  /// "known" (corpus closed form), "none", or a number.
  std::string alpha = "known";
  /// Condition reported by mode=condition; one of A, A', C, C'.
  std::string require = "C'";
  std::size_t condition_samples = 4096;

  double horizon = 5;
  FlowControls flow;
  std::optional<double> sqrt_s;
  std::optional<double> sqrt_t;

  double tau = 0.5;
  std::vector<double> taus;
  std::size_t max_steps = 50;
  ProxControls prox;

  std::optional<RecursionSpec> recursion;

  double certificate_tol = 1e-7;
  double slope_rel_tol = 0.02;
  double ede_tol = 1e-3;
  bool minimiser_check = true;
  double minimiser_tol = 1e-3;

  std::string output_dir;
  std::uint64_t seed = 0;
  /// Marks a designed negative control; the run still counts as a failure.
  bool expect_failure = false;
};

/// Reads YAML or JSON (chosen by extension, YAML otherwise). Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text, bool json = false, const std::string& fallback_id = "run");
void validate_config(const ExperimentConfig& config);

/// Manifest: a list under `configs:` of file paths (relative to the manifest) or inline configs.
std::vector<ExperimentConfig> load_manifest(const std::filesystem::path& path);

struct RunReport {
  ExperimentConfig config;
  std::string config_echo;
  std::optional<ConditionReport> condition;
  std::vector<RateCertificate> certificates;
  std::vector<std::string> files;
  std::vector<std::string> diagnostics;
  double wall_seconds = 0;
  bool verdict = false;
  std::string error;

  std::vector<std::string> failing_certificates() const;
};

/// Output root from KLFLOW_OUTPUT_ROOT, default "klflow-out".
std::filesystem::path output_root();

/// Runs the configured mode, writes CSVs and report.json under output_root()/output_dir.
RunReport run_experiment(const ExperimentConfig& config);

std::string report_json(const RunReport& report);

struct SuiteReport {
  std::vector<RunReport> runs;
  std::vector<std::string> failing_ids;
  std::vector<std::string> expected_failures;
  bool verdict = false;
};

/// Runs independent configs concurrently; runs are ordered by id.
SuiteReport run_suite(const std::vector<ExperimentConfig>& manifest);

std::string suite_json(const SuiteReport& report);

}  // namespace klflow
