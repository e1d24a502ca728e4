#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace maem {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntimeAbort = 2;
inline constexpr int kExitIo = 3;

// Inline overrides; echoed into the run's config.snapshot.
struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<long> steps;
};

int cmd_run(const std::string& config_path, const CliOverrides& overrides);
int cmd_ablate(const std::string& plan_path, const CliOverrides& overrides, int jobs);
int cmd_plot(const std::string& run_dir);

}  // namespace maem
