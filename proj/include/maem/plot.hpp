#pragma once

#include <array>
#include <string>
#include <vector>

#include "maem/data.hpp"
#include "maem/metrics.hpp"

namespace maem {

struct PlotPaths {
  std::string scatter_svg;
  std::string metrics_svg;
};

// Scatter of generated samples over the ground-truth mode locations.
std::string render_scatter_svg(const std::vector<std::array<double, 2>>& samples,
                               const GaussianMixtureSpec& spec);

// Metric-vs-step curves, one panel per metric.
std::string render_metrics_svg(const std::vector<MetricsRecord>& records);

// Reads samples_final.csv, metrics.jsonl and config.snapshot from `run_dir`
// and writes scatter.svg and metrics.svg next to them. Missing inputs raise
// errors naming the file.
PlotPaths plot_run(const std::string& run_dir);

}  // namespace maem
