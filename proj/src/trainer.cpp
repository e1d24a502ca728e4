#include "maem/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "maem/checkpoint.hpp"

namespace maem {

namespace fs = std::filesystem;
using ad::Tensor;

Adam::Adam(std::vector<Tensor>* params, AdamParams hp) : params_(params), hp_(hp) {
  for (const auto& p : *params_) {
    m_.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
    v_.emplace_back(static_cast<std::size_t>(p.size()), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(hp_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(hp_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_->size(); ++k) {
    Tensor& p = (*params_)[k];
    auto g = p.grad();
    auto vals = p.values_mut();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < m.size(); ++i) {
      m[i] = hp_.beta1 * m[i] + (1.0 - hp_.beta1) * g[i];
      v[i] = hp_.beta2 * v[i] + (1.0 - hp_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      vals[i] -= hp_.step_size * m_hat / (std::sqrt(v_hat) + hp_.epsilon);
    }
  }
}

namespace {

// Independent RNG streams per role, so e.g. evaluation never perturbs the
// training draw sequence.
enum RngStream : std::uint64_t { kData = 1, kLatent = 2, kObjective = 3, kEval = 4 };
constexpr std::uint64_t kGenInitStream = 10;
constexpr std::uint64_t kDiscInitStream = 11;

}  // namespace

Trainer::Trainer(TrainConfig config)
    : cfg_(std::move(config)),
      mixture_(cfg_.dataset.to_mixture()),
      gen_(cfg_.generator_spec(), derive_seed(cfg_.seed, kGenInitStream)),
      disc_(cfg_.discriminator_spec(), derive_seed(cfg_.seed, kDiscInitStream)),
      buffer_(static_cast<std::size_t>(cfg_.buffer_capacity), static_cast<std::size_t>(cfg_.m)),
      adam_gen_(&gen_.net.parameters(), cfg_.optimizer),
      adam_disc_(&disc_.net.parameters(), cfg_.optimizer),
      data_rng_(derive_seed(cfg_.seed, kData)),
      latent_rng_(derive_seed(cfg_.seed, kLatent)),
      objective_rng_(derive_seed(cfg_.seed, kObjective)),
      eval_rng_(derive_seed(cfg_.seed, kEval)) {
  cfg_.validate();
}

ObjectiveOptions Trainer::objective_options() const {
  ObjectiveOptions opts;
  opts.weights = cfg_.weights;
  opts.enable_dlle = cfg_.enable_dlle;
  opts.enable_disomap = cfg_.enable_disomap;
  opts.enable_rbmaem = cfg_.enable_rbmaem;
  opts.enable_gp = cfg_.enable_gp;
  opts.gp_center = cfg_.gp_center;
  opts.aug = cfg_.aug;
  // Warm-up: nearest-neighbor queries over a near-empty buffer are degenerate.
  opts.entropy_warmup = static_cast<std::size_t>(cfg_.batch_size);
  opts.ent_in_discriminator = cfg_.ent_in_discriminator;
  opts.manifold_reg_into_generator = cfg_.manifold_reg_into_generator;
  return opts;
}

Tensor Trainer::sample_real_batch(long n) { return sample_real(mixture_, n, data_rng_); }

void Trainer::check_finite(const std::map<std::string, double>& components, long step) {
  for (const auto& [name, value] : components) {
    if (!std::isfinite(value)) {
      throw TrainAbort("non-finite loss '" + name + "' at step " + std::to_string(step));
    }
  }
}

std::map<std::string, double> Trainer::train_discriminator_step(const Tensor& real_batch) {
  Tensor fake;
  {
    ad::NoGradGuard guard;  // generator frozen; fakes enter detached
    fake = gen_.generate(sample_latent(cfg_.batch_size, cfg_.z_dim, latent_rng_));
  }
  ad::Tape tape;
  ObjectiveResult res =
      discriminator_objective(disc_, real_batch, fake, buffer_, objective_options(), objective_rng_);
  check_finite(res.components, adam_disc_.step_count() + 1);
  disc_.net.zero_grad();
  tape.backward(res.total);
  adam_disc_.step();
  if (cfg_.push_at_disc_steps) push_embeddings(fake);
  return res.components;
}

std::map<std::string, double> Trainer::train_generator_step() {
  ad::Tape tape;
  Tensor z = sample_latent(cfg_.batch_size, cfg_.z_dim, latent_rng_);
  Tensor fake = gen_.generate(z);
  ObjectiveResult res = generator_objective(disc_, fake, buffer_, objective_options(), objective_rng_);
  check_finite(res.components, adam_gen_.step_count() + 1);
  gen_.net.zero_grad();
  tape.backward(res.total);
  adam_gen_.step();
  // Embeddings enter the buffer only after the loss is computed, preventing
  // trivial self-matches within the step.
  push_embeddings(fake);
  return res.components;
}

void Trainer::push_embeddings(const Tensor& x_generated) {
  ad::NoGradGuard guard;
  auto push_batch = [&](const Tensor& x) {
    Tensor emb = disc_.embed(x.detach());
    auto ev = emb.values();
    const long m = emb.cols();
    for (long i = 0; i < emb.rows(); ++i) {
      buffer_.push(EmbeddingCode(ev.begin() + i * m, ev.begin() + (i + 1) * m));
    }
  };
  if (cfg_.buffer_source == BufferSource::generated || cfg_.buffer_source == BufferSource::both) {
    push_batch(x_generated);
  }
  if (cfg_.buffer_source == BufferSource::real || cfg_.buffer_source == BufferSource::both) {
    push_batch(sample_real_batch(cfg_.batch_size));
  }
}

MetricsRecord Trainer::evaluate(long step) {
  ad::NoGradGuard guard;
  Tensor z = sample_latent(cfg_.eval_samples, cfg_.z_dim, eval_rng_);
  Tensor samples = gen_.generate(z);

  MetricsRecord rec;
  rec.step = step;
  rec.mode_coverage = mode_coverage(samples, mixture_, cfg_.metrics.radius_mult,
                                    cfg_.metrics.min_count);
  rec.high_quality_ratio = high_quality_ratio(samples, mixture_, cfg_.metrics.radius_mult);
  rec.i_variance = i_variance(samples, {}, cfg_.metrics.i_variance_squared_inside);
  const long n_ent = std::min(cfg_.metrics.embedding_entropy_samples, cfg_.eval_samples);
  Tensor emb = disc_.embed(ad::rows(samples, 0, n_ent));
  rec.embedding_entropy_nats = knn_entropy(emb);
  rec.losses = last_components_;
  return rec;
}

std::string metrics_record_to_json_line(const MetricsRecord& rec) {
  nlohmann::ordered_json j;
  j["step"] = rec.step;
  j["mode_coverage"] = rec.mode_coverage;
  j["high_quality_ratio"] = rec.high_quality_ratio;
  j["i_variance"] = rec.i_variance;
  j["embedding_entropy_nats"] = rec.embedding_entropy_nats;
  j["losses"] = rec.losses;
  return j.dump();
}

MetricsRecord metrics_record_from_json_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  MetricsRecord rec;
  rec.step = j.at("step").get<long>();
  rec.mode_coverage = j.at("mode_coverage").get<int>();
  rec.high_quality_ratio = j.at("high_quality_ratio").get<double>();
  rec.i_variance = j.at("i_variance").get<double>();
  rec.embedding_entropy_nats = j.at("embedding_entropy_nats").get<double>();
  if (j.contains("losses")) {
    rec.losses = j.at("losses").get<std::map<std::string, double>>();
  }
  return rec;
}

TrainResult Trainer::run() {
  TrainResult result;
  result.run_dir = cfg_.out_dir;

  fs::create_directories(cfg_.out_dir);
  save_config(cfg_.out_dir + "/config.snapshot", cfg_);

  std::ofstream log(cfg_.out_dir + "/metrics.jsonl", std::ios::trunc);
  if (!log) throw std::runtime_error("run: cannot open metrics.jsonl in " + cfg_.out_dir);

  auto write_samples = [&]() {
    ad::NoGradGuard guard;
    Rng sample_rng(derive_seed(cfg_.seed, 20));
    Tensor z = sample_latent(cfg_.eval_samples, cfg_.z_dim, sample_rng);
    Tensor samples = gen_.generate(z);
    std::ofstream csv(cfg_.out_dir + "/samples_final.csv", std::ios::trunc);
    csv.precision(17);
    auto sv = samples.values();
    const long d = samples.cols();
    for (long i = 0; i < samples.rows(); ++i) {
      for (long j = 0; j < d; ++j) {
        if (j) csv << ',';
        csv << sv[i * d + j];
      }
      csv << '\n';
    }
  };

  auto note = [&](long step, const std::map<std::string, double>& comps) {
    for (const auto& [k, v] : comps) last_components_[k] = v;
    loss_history_.emplace_back(step, comps);
    if (loss_history_.size() > 10) loss_history_.pop_front();
  };

  try {
    for (long step = 1; step <= cfg_.total_steps; ++step) {
      for (int c = 0; c < cfg_.n_critic; ++c) {
        note(step, train_discriminator_step(sample_real_batch(cfg_.batch_size)));
      }
      note(step, train_generator_step());

      const bool last_step = step == cfg_.total_steps;
      if (step % cfg_.eval_every == 0 || last_step) {
        MetricsRecord rec;
        try {
          rec = evaluate(step);
        } catch (const std::exception& e) {
          // A degenerate generator (constant output) makes the entropy
          // estimate undefined; treat it as a run failure worth forensics.
          throw TrainAbort(std::string("evaluation failed at step ") +
                           std::to_string(step) + ": " + e.what());
        }
        log << metrics_record_to_json_line(rec) << '\n';
        log.flush();
        result.final_metrics = rec;
        result.has_final_metrics = true;
      }
      result.steps_completed = step;
    }
  } catch (const TrainAbort& abort) {
    result.aborted = true;
    result.abort_reason = abort.what();
    std::ofstream dump(cfg_.out_dir + "/abort.txt", std::ios::trunc);
    dump << abort.what() << "\nlast recorded loss snapshots (oldest first):\n";
    for (const auto& [s, comps] : loss_history_) {
      dump << "step " << s;
      for (const auto& [k, v] : comps) dump << ' ' << k << '=' << v;
      dump << '\n';
    }
    std::cerr << "run aborted: " << abort.what() << " (dump in " << cfg_.out_dir
              << "/abort.txt)\n";
    return result;  // partial log preserved
  }

  save_checkpoint(cfg_.out_dir + "/checkpoint.bin", gen_, disc_);
  write_samples();
  return result;
}

TrainResult run_training(const TrainConfig& config) {
  Trainer trainer(config);
  return trainer.run();
}

}  // namespace maem
