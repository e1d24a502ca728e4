#pragma once

#include <deque>
#include <fstream>
#include <map>
#include <string>

#include "maem/config.hpp"
#include "maem/metrics.hpp"
#include "maem/replay_buffer.hpp"

namespace maem {

// Adaptive moment estimation over a parameter list. Moment accumulators and
// the step counter mirror the parameter layout.
class Adam {
 public:
  Adam(std::vector<ad::Tensor>* params, AdamParams hp);

  // Applies one update from the gradients currently accumulated on the
  // parameters. Does not zero them.
  void step();

  long step_count() const { return t_; }

 private:
  std::vector<ad::Tensor>* params_;
  AdamParams hp_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

// Thrown when a loss goes non-finite; run() converts it into an aborted
// result after dumping the recent loss history.
struct TrainAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  bool aborted = false;
  std::string abort_reason;
  long steps_completed = 0;
  std::string run_dir;
  bool has_final_metrics = false;
  MetricsRecord final_metrics;
};

// One full MaEM pipeline instance: models, buffer, optimizer states and the
// RNG streams, all derived deterministically from the config seed.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);

  // One discriminator update on the given real batch (generator frozen).
  std::map<std::string, double> train_discriminator_step(const ad::Tensor& real_batch);

  // One generator update (discriminator frozen); pushes the batch's detached
  // embeddings into the buffer afterwards, per buffer_source.
  std::map<std::string, double> train_generator_step();

  // Draws eval_samples from the generator and computes a MetricsRecord.
  MetricsRecord evaluate(long step);

  // Executes total_steps iterations of (n_critic disc steps + 1 gen step),
  // logging metrics every eval_every steps, then writes the checkpoint and
  // final samples. Identical config+seed gives a byte-identical log.
  TrainResult run();

  const TrainConfig& config() const { return cfg_; }
  Generator& generator() { return gen_; }
  Discriminator& discriminator() { return disc_; }
  ReplayBuffer& buffer() { return buffer_; }
  Rng& data_rng() { return data_rng_; }
  Rng& latent_rng() { return latent_rng_; }

 private:
  ad::Tensor sample_real_batch(long n);
  void push_embeddings(const ad::Tensor& x_generated);
  void check_finite(const std::map<std::string, double>& components, long step);
  ObjectiveOptions objective_options() const;

  TrainConfig cfg_;
  GaussianMixtureSpec mixture_;
  Generator gen_;
  Discriminator disc_;
  ReplayBuffer buffer_;
  Adam adam_gen_;
  Adam adam_disc_;
  Rng data_rng_;
  Rng latent_rng_;
  Rng objective_rng_;
  Rng eval_rng_;
  std::map<std::string, double> last_components_;
  std::deque<std::pair<long, std::map<std::string, double>>> loss_history_;
};

// Convenience wrapper: construct, run, return.
TrainResult run_training(const TrainConfig& config);

// JSON line used for metrics.jsonl; exposed for the summary tooling.
std::string metrics_record_to_json_line(const MetricsRecord& rec);
MetricsRecord metrics_record_from_json_line(const std::string& line);

}  // namespace maem
