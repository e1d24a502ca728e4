#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "maem/data.hpp"
#include "maem/losses.hpp"
#include "maem/mlp.hpp"

namespace maem {

struct DatasetSpec {
  enum class Kind { ring, grid };
  Kind kind = Kind::ring;
  int k = 8;             // ring
  double radius = 2.0;   // ring
  int rows = 5;          // grid
  int cols = 5;          // grid
  double spacing = 2.0;  // grid
  double sigma = 0.02;

  GaussianMixtureSpec to_mixture() const;
};

struct AdamParams {
  double step_size = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

enum class BufferSource { generated, real, both };

const char* buffer_source_name(BufferSource s);
BufferSource buffer_source_from_string(const std::string& s);

struct MetricsParams {
  double radius_mult = 3.0;             // mode ownership radius, in sigmas
  int min_count = 10;                   // samples needed to count a mode
  bool i_variance_squared_inside = false;
  long embedding_entropy_samples = 2000;
};

// Full experiment configuration. Defaults reproduce the standard 2-D
// mode-collapse setup: ring of 8 Gaussians, WGAN-GP-style optimizer settings.
struct TrainConfig {
  std::uint64_t seed = 1;
  DatasetSpec dataset;

  long z_dim = 8;
  long m = 8;  // discriminator embedding dimension
  std::vector<long> gen_hidden{128, 128};
  std::vector<long> disc_hidden{128, 128};

  LossWeights weights;

  long buffer_capacity = 1024;
  BufferSource buffer_source = BufferSource::generated;

  int n_critic = 5;
  long batch_size = 64;
  AdamParams optimizer;
  long total_steps = 20000;
  long eval_every = 500;
  long eval_samples = 10000;

  bool enable_dlle = true;
  bool enable_disomap = true;
  bool enable_rbmaem = true;
  bool enable_gp = true;
  double gp_center = 1.0;
  Augmentation aug;
  bool ent_in_discriminator = false;
  bool manifold_reg_into_generator = false;
  bool push_at_disc_steps = false;  // default: buffer fed at generator steps only

  MetricsParams metrics;
  std::string out_dir = "runs/run";

  void validate() const;
  MlpSpec generator_spec() const;
  MlpSpec discriminator_spec() const;
};

// Strict parsing: every key must be known, every value well-typed; errors
// name the offending key and list the valid ones. Missing keys keep their
// defaults.
TrainConfig config_from_json(const nlohmann::json& j);

// Canonical echo: fixed key order, every field explicit. parse -> canonicalize
// -> reparse is a fixed point.
nlohmann::ordered_json config_to_json(const TrainConfig& c);

TrainConfig load_config(const std::string& path);
void save_config(const std::string& path, const TrainConfig& c);

// Merges a partial JSON override tree (same schema) onto `c`.
void apply_overrides(TrainConfig& c, const nlohmann::json& overrides);

struct ExperimentVariant {
  std::string name;
  nlohmann::json overrides;
};

// Plan file: { "base": {...config...}, "variants": [{"name":..,
// "overrides": {...}}...], "seeds": [..], "out_root": "..." }.
struct ExperimentPlan {
  TrainConfig base;
  std::vector<ExperimentVariant> variants;
  std::vector<std::uint64_t> seeds;
  std::string out_root = "runs/ablation";
};

ExperimentPlan plan_from_json(const nlohmann::json& j);
ExperimentPlan load_plan(const std::string& path);

}  // namespace maem
