#include "maem/cli.hpp"

#include <iostream>
#include <stdexcept>

#include "maem/ablate.hpp"
#include "maem/config.hpp"
#include "maem/plot.hpp"
#include "maem/trainer.hpp"

namespace maem {

namespace {

void apply_cli_overrides(TrainConfig& cfg, const CliOverrides& overrides) {
  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.out) cfg.out_dir = *overrides.out;
  if (overrides.steps) cfg.total_steps = *overrides.steps;
  cfg.validate();
}

}  // namespace

int cmd_run(const std::string& config_path, const CliOverrides& overrides) {
  TrainConfig cfg;
  try {
    cfg = load_config(config_path);
    apply_cli_overrides(cfg, overrides);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }

  try {
    TrainResult result = run_training(cfg);
    if (result.aborted) {
      std::cerr << "run aborted after " << result.steps_completed << " steps: "
                << result.abort_reason << '\n';
      return kExitRuntimeAbort;
    }
    std::cout << "run complete: " << result.run_dir << " (" << result.steps_completed
              << " steps)\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

int cmd_ablate(const std::string& plan_path, const CliOverrides& overrides, int jobs) {
  ExperimentPlan plan;
  try {
    plan = load_plan(plan_path);
    if (overrides.out) plan.out_root = *overrides.out;
    if (overrides.steps) plan.base.total_steps = *overrides.steps;
    if (overrides.seed) plan.seeds = {*overrides.seed};
    plan.base.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }

  try {
    AblationResult result = run_ablation(plan, jobs);
    std::cout << format_summary_text(result.table);
    std::cout << "summary: " << result.summary_txt_path << ", "
              << result.summary_tsv_path << '\n';
    for (const auto& run : result.runs) {
      if (run.failed) return kExitRuntimeAbort;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

int cmd_plot(const std::string& run_dir) {
  try {
    PlotPaths paths = plot_run(run_dir);
    std::cout << "wrote " << paths.scatter_svg << " and " << paths.metrics_svg << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
}

}  // namespace maem
