#include "klflow/klflow.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int print_run(const klflow::RunReport& r) {
  std::cout << r.config.id << ": " << (r.verdict ? "pass" : "fail");
  if (!r.error.empty()) std::cout << " (error: " << r.error << ")";
  std::cout << '\n';
  for (const auto& c : r.certificates) {
    std::cout << "  " << (c.verdict ? "ok   " : "FAIL ") << c.label << " margin=" << klflow::format_double(c.margin);
    if (!c.note.empty()) std::cout << " [" << c.note << "]";
    std::cout << '\n';
  }
  for (const auto& d : r.diagnostics) std::cout << "  - " << d << '\n';
  return r.verdict ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"klflow: convergence certificates for gradient flows and proximal point sequences"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment config (YAML or JSON)");
  run->add_option("config", config_path, "Config file")->required();

  std::string manifest_path;
  auto* suite = app.add_subcommand("suite", "Run every config listed in a manifest");
  suite->add_option("manifest", manifest_path, "Manifest file")->required();

  app.add_subcommand("list-corpus", "List registry ids of the built-in functionals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      const auto report = klflow::run_experiment(klflow::load_config(config_path));
      std::cout << "output: " << (klflow::output_root() / report.config.output_dir).string() << '\n';
      return print_run(report);
    }
    if (*suite) {
      const auto s = klflow::run_suite(klflow::load_manifest(manifest_path));
      for (const auto& r : s.runs) print_run(r);
      std::cout << "suite: " << (s.verdict ? "pass" : "fail") << " (" << s.runs.size() << " runs, "
                << s.failing_ids.size() << " failing";
      if (!s.expected_failures.empty()) std::cout << ", " << s.expected_failures.size() << " designed";
      std::cout << ")\n";
      for (const auto& id : s.failing_ids) {
        const bool designed =
            std::find(s.expected_failures.begin(), s.expected_failures.end(), id) != s.expected_failures.end();
        std::cout << "  failing: " << id << (designed ? " (designed failure)" : "") << '\n';
      }
      return s.verdict ? 0 : 1;
    }
    for (const auto& e : klflow::list_corpus()) std::cout << e.id << "\t" << e.provenance << '\n';
    return 0;
  } catch (const klflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
