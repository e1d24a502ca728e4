#include "maem/ablate.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "maem/trainer.hpp"

namespace maem {

namespace fs = std::filesystem;

MetricsRecord read_final_metrics(const std::string& run_dir) {
  std::ifstream is(run_dir + "/metrics.jsonl");
  if (!is) throw std::runtime_error("ablate: missing " + run_dir + "/metrics.jsonl");
  std::string line, last;
  while (std::getline(is, line)) {
    if (!line.empty()) last = line;
  }
  if (last.empty()) throw std::runtime_error("ablate: empty metrics log in " + run_dir);
  return metrics_record_from_json_line(last);
}

namespace {

struct Stats {
  double mean = 0.0, stdev = 0.0;
};

Stats mean_std(const std::vector<double>& xs) {
  Stats s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

AblationResult run_ablation(const ExperimentPlan& plan, int n_workers) {
  AblationResult result;
  fs::create_directories(plan.out_root);

  struct Job {
    std::size_t variant_idx;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < plan.variants.size(); ++v) {
    for (std::uint64_t seed : plan.seeds) jobs.push_back({v, seed});
  }
  result.runs.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      const Job& job = jobs[j];
      const ExperimentVariant& variant = plan.variants[job.variant_idx];

      RunOutcome& out = result.runs[j];
      out.variant = variant.name;
      out.seed = job.seed;
      out.run_dir =
          plan.out_root + "/" + variant.name + "/seed_" + std::to_string(job.seed);
      try {
        TrainConfig cfg = plan.base;
        apply_overrides(cfg, variant.overrides);
        cfg.seed = job.seed;
        cfg.out_dir = out.run_dir;
        TrainResult run = run_training(cfg);
        if (run.aborted) {
          out.failed = true;
          out.failure_reason = run.abort_reason;
        } else {
          out.final_metrics = read_final_metrics(out.run_dir);
          out.has_metrics = true;
        }
      } catch (const std::exception& e) {
        out.failed = true;
        out.failure_reason = e.what();
      }
      std::lock_guard<std::mutex> lock(io_mutex);
      std::cout << "[ablate] " << out.variant << " seed " << out.seed << ": "
                << (out.failed ? ("FAILED (" + out.failure_reason + ")") : "done")
                << std::endl;
    }
  };

  const int workers = std::max(1, n_workers);
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (const ExperimentVariant& variant : plan.variants) {
    VariantAggregate agg;
    agg.name = variant.name;
    std::vector<double> cov, hqr, ivar, ent;
    for (const RunOutcome& out : result.runs) {
      if (out.variant != variant.name) continue;
      ++agg.runs;
      if (out.failed || !out.has_metrics) {
        ++agg.failed;
        continue;
      }
      cov.push_back(static_cast<double>(out.final_metrics.mode_coverage));
      hqr.push_back(out.final_metrics.high_quality_ratio);
      ivar.push_back(out.final_metrics.i_variance);
      ent.push_back(out.final_metrics.embedding_entropy_nats);
    }
    const Stats c = mean_std(cov), h = mean_std(hqr), iv = mean_std(ivar), e = mean_std(ent);
    agg.coverage_mean = c.mean;
    agg.coverage_std = c.stdev;
    agg.hq_ratio_mean = h.mean;
    agg.hq_ratio_std = h.stdev;
    agg.i_variance_mean = iv.mean;
    agg.i_variance_std = iv.stdev;
    agg.entropy_mean = e.mean;
    agg.entropy_std = e.stdev;
    result.table.push_back(agg);
  }

  result.summary_txt_path = plan.out_root + "/summary.txt";
  result.summary_tsv_path = plan.out_root + "/summary.tsv";
  {
    std::ofstream txt(result.summary_txt_path, std::ios::trunc);
    txt << format_summary_text(result.table);
    std::ofstream tsv(result.summary_tsv_path, std::ios::trunc);
    tsv << format_summary_tsv(result.table);
  }
  return result;
}

std::string format_summary_text(const std::vector<VariantAggregate>& table) {
  std::ostringstream os;
  std::size_t name_w = 12;
  for (const auto& row : table) name_w = std::max(name_w, row.name.size() + 2);
  os << std::left << std::setw(static_cast<int>(name_w)) << "variant" << std::right
     << std::setw(6) << "runs" << std::setw(8) << "failed" << std::setw(18)
     << "coverage" << std::setw(18) << "hq_ratio" << std::setw(20) << "i_variance"
     << std::setw(20) << "entropy" << '\n';
  for (const auto& row : table) {
    os << std::left << std::setw(static_cast<int>(name_w)) << row.name << std::right
       << std::setw(6) << row.runs << std::setw(8) << row.failed;
    if (row.failed == row.runs) {
      os << std::setw(18) << "FAILED" << std::setw(18) << "FAILED" << std::setw(20)
         << "FAILED" << std::setw(20) << "FAILED" << '\n';
      continue;
    }
    os << std::setw(18) << (fmt(row.coverage_mean, 2) + " +- " + fmt(row.coverage_std, 2))
       << std::setw(18) << (fmt(row.hq_ratio_mean) + " +- " + fmt(row.hq_ratio_std))
       << std::setw(20) << (fmt(row.i_variance_mean) + " +- " + fmt(row.i_variance_std))
       << std::setw(20) << (fmt(row.entropy_mean) + " +- " + fmt(row.entropy_std))
       << '\n';
  }
  return os.str();
}

std::string format_summary_tsv(const std::vector<VariantAggregate>& table) {
  std::ostringstream os;
  os << "variant\truns\tfailed\tcoverage_mean\tcoverage_std\thq_ratio_mean\t"
        "hq_ratio_std\ti_variance_mean\ti_variance_std\tentropy_mean\tentropy_std\n";
  os.precision(17);
  for (const auto& row : table) {
    os << row.name << '\t' << row.runs << '\t' << row.failed << '\t';
    if (row.failed == row.runs) {
      os << "FAILED\tFAILED\tFAILED\tFAILED\tFAILED\tFAILED\tFAILED\tFAILED\n";
      continue;
    }
    os << row.coverage_mean << '\t' << row.coverage_std << '\t' << row.hq_ratio_mean
       << '\t' << row.hq_ratio_std << '\t' << row.i_variance_mean << '\t'
       << row.i_variance_std << '\t' << row.entropy_mean << '\t' << row.entropy_std
       << '\n';
  }
  return os.str();
}

}  // namespace maem
