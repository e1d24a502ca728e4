#include <CLI11.hpp>

#include <thread>

#include "maem/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"maemlab: manifold-entropy GAN laboratory on synthetic 2-D data"};
  app.require_subcommand(1);

  std::string config_path, plan_path, run_dir;
  maem::CliOverrides overrides;
  std::uint64_t seed = 0;
  std::string out;
  long steps = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "train from a config file");
  run->add_option("config", config_path, "path to a JSON config")->required();
  auto* run_seed = run->add_option("--seed", seed, "override the config seed");
  auto* run_out = run->add_option("--out", out, "override the output directory");
  auto* run_steps = run->add_option("--steps", steps, "override total_steps");

  auto* ablate = app.add_subcommand("ablate", "run an experiment plan (variants x seeds)");
  ablate->add_option("plan", plan_path, "path to a JSON plan")->required();
  auto* ab_seed = ablate->add_option("--seed", seed, "replace the plan's seed list");
  auto* ab_out = ablate->add_option("--out", out, "override the output root");
  auto* ab_steps = ablate->add_option("--steps", steps, "override base total_steps");
  ablate->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "render scatter.svg and metrics.svg for a run");
  plot->add_option("run_dir", run_dir, "a completed run directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (run_seed->count() || ab_seed->count()) overrides.seed = seed;
  if (run_out->count() || ab_out->count()) overrides.out = out;
  if (run_steps->count() || ab_steps->count()) overrides.steps = steps;

  if (run->parsed()) return maem::cmd_run(config_path, overrides);
  if (ablate->parsed()) return maem::cmd_ablate(plan_path, overrides, jobs);
  if (plot->parsed()) return maem::cmd_plot(run_dir);
  return maem::kExitValidation;
}
