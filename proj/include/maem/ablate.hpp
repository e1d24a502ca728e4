#pragma once

#include <string>
#include <vector>

#include "maem/config.hpp"
#include "maem/metrics.hpp"

namespace maem {

struct RunOutcome {
  std::string variant;
  std::uint64_t seed = 0;
  std::string run_dir;
  bool failed = false;
  std::string failure_reason;
  bool has_metrics = false;
  MetricsRecord final_metrics;  // last line of the run's metrics.jsonl
};

struct VariantAggregate {
  std::string name;
  int runs = 0;
  int failed = 0;
  // Statistics over the runs that produced metrics (mean, sample std).
  double coverage_mean = 0.0, coverage_std = 0.0;
  double hq_ratio_mean = 0.0, hq_ratio_std = 0.0;
  double i_variance_mean = 0.0, i_variance_std = 0.0;
  double entropy_mean = 0.0, entropy_std = 0.0;
};

struct AblationResult {
  std::vector<RunOutcome> runs;
  std::vector<VariantAggregate> table;
  std::string summary_txt_path;
  std::string summary_tsv_path;
};

// Runs every (variant x seed) combination; independent runs may execute in
// parallel across `n_workers` threads (each run owns its RNG streams and
// output directory). A failed run is marked FAILED and the rest proceed.
// Writes summary.txt (aligned) and summary.tsv (one header row, one row per
// variant, tab-separated) under plan.out_root.
AblationResult run_ablation(const ExperimentPlan& plan, int n_workers);

// Aggregation reads back each run's metrics.jsonl so the table provably
// reflects the on-disk logs.
MetricsRecord read_final_metrics(const std::string& run_dir);

std::string format_summary_text(const std::vector<VariantAggregate>& table);
std::string format_summary_tsv(const std::vector<VariantAggregate>& table);

}  // namespace maem
