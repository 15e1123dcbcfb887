// entropy-lab: runs the numerical experiments through the C interface.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "entropy_lab/entropy_lab.h"

namespace {

int list() {
  for (size_t i = 0; i < el_experiment_count(); ++i)
    std::printf("%s \xE2\x80\x94 %s\n", el_experiment_name(i), el_experiment_anchor(i));
  return 0;
}

int run(const std::string& experiment, const std::string& config, const std::string& out,
        std::optional<std::uint64_t> seed, bool parallel) {
  el_report* report = nullptr;
  const std::uint64_t seed_value = seed.value_or(0);
  const el_status s = el_run(experiment.c_str(), config.empty() ? nullptr : config.c_str(),
                             out.empty() ? nullptr : out.c_str(), seed ? &seed_value : nullptr,
                             parallel ? 1 : 0, &report);
  if (!report) {
    std::fprintf(stderr, "entropy-lab: %s: %s\n", el_status_name(s), el_last_error());
    return 2;
  }
  const int code = el_report_exit_code(report);
  if (code == 2) {
    std::fprintf(stderr, "entropy-lab: config error: %s\n", el_report_message(report));
  } else {
    const size_t failures = el_report_failure_count(report);
    for (size_t i = 0; i < failures; ++i) std::printf("FAIL %s\n", el_report_failure(report, i));
    std::printf("%s %s -> %s\n", code == 0 ? "PASSED" : "FAILED", experiment.c_str(),
                el_report_output_dir(report));
  }
  el_report_destroy(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on the W entropy and the heat kernel"};
  app.set_version_flag("--version", std::string(el_version()));
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "List experiments with their anchors");

  auto* run_cmd = app.add_subcommand("run", "Run an experiment");
  std::string experiment, config, out;
  std::optional<std::uint64_t> seed;
  bool parallel = false;
  run_cmd->add_option("experiment", experiment, "Experiment name or 'all'")->required();
  run_cmd->add_option("--config", config, "key=value config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out, "Output directory");
  run_cmd->add_option("--seed", seed, "Seed for randomized sweeps");
  run_cmd->add_flag("--parallel", parallel, "Run independent experiments concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (list_cmd->parsed()) return list();
  return run(experiment, config, out, seed, parallel);
}
