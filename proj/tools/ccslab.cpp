// ccslab command-line driver.
//
//   ccslab run <config>       run an experiment, write CSV tables
//   ccslab validate <config>  parse and validate only
//   ccslab suite              run the acceptance checks
//
// Exit codes: 0 ok, 2 configuration error, 3 saturation or ill-conditioning,
// 4 integrator failure, 1 anything else.

#include "ccslab/ccslab.hpp"
#include "ccslab/suite.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kConditioning = 3, kIntegrator = 4 };

int report(const std::exception& e, int code) {
  std::cerr << "ccslab: " << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled coherent-state propagation for bosonic multi-well models"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string output_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--output-dir", output_dir, "Directory for output files");
  app.add_option("--seed", seed, "Override the configured RNG seed");
  app.add_flag("-q,--quiet", quiet, "Suppress progress messages");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a configuration file");
  run->add_option("config", config_path, "Configuration file")->required();
  auto* validate = app.add_subcommand("validate", "Validate a configuration file");
  validate->add_option("config", config_path, "Configuration file")->required();
  auto* suite = app.add_subcommand("suite", "Run the acceptance checks");
  std::vector<int> only;
  suite->add_option("--only", only, "Run only these criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  ccslab::Logger log;
  if (!quiet) log = [](const std::string& s) { std::cerr << s << "\n"; };

  try {
    if (*suite) {
      ccslab::AcceptanceSuite s(log);
      bool ok = true;
      if (only.empty()) {
        for (int i = 1; i <= ccslab::AcceptanceSuite::kCount; ++i) only.push_back(i);
      }
      for (int id : only) {
        const auto r = s.check(id);
        std::cout << ccslab::format_check(r) << std::endl;
        ok = ok && r.pass;
      }
      return ok ? kOk : kOther;
    }

    auto cfg = ccslab::parse_config_file(config_path);
    if (seed) cfg.seed = *seed;

    if (*validate) {
      if (cfg.experiment == ccslab::Experiment::PropertySuite) {
        std::cout << "ok: property-suite\n";
        return kOk;
      }
      std::cout << "ok: " << ccslab::experiment_name(cfg.experiment) << ", config hash "
                << ccslab::config_hash(cfg) << ", " << ccslab::expand_runs(cfg).size() << " run(s)\n";
      return kOk;
    }

    if (cfg.experiment == ccslab::Experiment::PropertySuite) {
      ccslab::AcceptanceSuite s(log);
      bool ok = true;
      for (const auto& r : s.run_all()) {
        if (quiet) std::cout << ccslab::format_check(r) << "\n";
        ok = ok && r.pass;
      }
      return ok ? kOk : kOther;
    }

    const auto runs = ccslab::expand_runs(cfg);
    const auto tables = ccslab::run_all(cfg, log);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto path = ccslab::output_path(cfg, runs[i], runs.size(), output_dir);
      ccslab::write_atomic(path, ccslab::to_csv(tables[i]));
      if (!quiet) std::cerr << "wrote " << path.string() << "\n";
    }
    return kOk;
  } catch (const ccslab::ConfigError& e) {
    return report(e, kConfig);
  } catch (const ccslab::Saturated& e) {
    return report(e, kConditioning);
  } catch (const ccslab::IllConditioned& e) {
    std::cerr << "ccslab: " << e.what() << " (epsilon = " << e.epsilon << " at t = " << e.time << ")\n";
    return kConditioning;
  } catch (const ccslab::StepSizeUnderflow& e) {
    std::cerr << "ccslab: " << e.what() << " (t = " << e.time << ")\n";
    return kIntegrator;
  } catch (const std::exception& e) {
    return report(e, kOther);
  }
}
