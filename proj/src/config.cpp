#include "maem/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace maem {

using nlohmann::json;
using nlohmann::ordered_json;

GaussianMixtureSpec DatasetSpec::to_mixture() const {
  return kind == Kind::ring ? make_ring(k, radius, sigma)
                            : make_grid(rows, cols, spacing, sigma);
}

const char* buffer_source_name(BufferSource s) {
  switch (s) {
    case BufferSource::generated: return "generated";
    case BufferSource::real: return "real";
    case BufferSource::both: return "both";
  }
  return "?";
}

BufferSource buffer_source_from_string(const std::string& s) {
  if (s == "generated") return BufferSource::generated;
  if (s == "real") return BufferSource::real;
  if (s == "both") return BufferSource::both;
  throw std::invalid_argument("unknown buffer source '" + s + "'");
}

void TrainConfig::validate() const {
  dataset.to_mixture();  // validates dataset parameters
  if (z_dim < 1) throw std::invalid_argument("config: z_dim must be >= 1");
  if (m < 1) throw std::invalid_argument("config: m must be >= 1");
  weights.validate();
  if (buffer_capacity < 1) throw std::invalid_argument("config: buffer_capacity must be >= 1");
  if (n_critic < 1) throw std::invalid_argument("config: n_critic must be >= 1");
  if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
  if (total_steps < 0) throw std::invalid_argument("config: total_steps must be >= 0");
  if (eval_every < 1) throw std::invalid_argument("config: eval_every must be >= 1");
  if (eval_samples < 2) throw std::invalid_argument("config: eval_samples must be >= 2");
  if (!(optimizer.step_size > 0.0)) throw std::invalid_argument("config: step_size must be > 0");
  if (gp_center != 0.0 && gp_center != 1.0) {
    throw std::invalid_argument("config: gp_center must be 0 or 1");
  }
  aug.validate();
  if (metrics.min_count < 1) throw std::invalid_argument("config: metrics.min_count must be >= 1");
  if (metrics.embedding_entropy_samples < 10) {
    throw std::invalid_argument("config: metrics.embedding_entropy_samples must be >= 10");
  }
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
  generator_spec().validate();
  discriminator_spec().validate();
}

MlpSpec TrainConfig::generator_spec() const {
  MlpSpec spec;
  spec.layer_widths.push_back(z_dim);
  for (long w : gen_hidden) spec.layer_widths.push_back(w);
  spec.layer_widths.push_back(dataset.to_mixture().dim());
  spec.hidden_activation = Activation::relu;
  spec.output_activation = Activation::linear;
  return spec;
}

MlpSpec TrainConfig::discriminator_spec() const {
  MlpSpec spec;
  spec.layer_widths.push_back(dataset.to_mixture().dim());
  for (long w : disc_hidden) spec.layer_widths.push_back(w);
  spec.layer_widths.push_back(m);
  spec.hidden_activation = Activation::relu;
  spec.output_activation = Activation::linear;
  return spec;
}

namespace {

[[noreturn]] void unknown_key(const std::string& key, const std::string& section,
                              const std::set<std::string>& valid) {
  std::ostringstream os;
  os << "config: unknown key '" << key << "'";
  if (!section.empty()) os << " in section '" << section << "'";
  os << "; valid keys:";
  for (const auto& k : valid) os << ' ' << k;
  throw std::invalid_argument(os.str());
}

void require_known_keys(const json& j, const std::string& section,
                        const std::set<std::string>& valid) {
  if (!j.is_object()) {
    throw std::invalid_argument("config: section '" + section + "' must be an object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!valid.count(key)) unknown_key(key, section, valid);
  }
}

template <typename T>
void read_to(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_dataset(const json& j, DatasetSpec& d) {
  require_known_keys(j, "dataset",
                     {"kind", "k", "radius", "rows", "cols", "spacing", "sigma"});
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ring") d.kind = DatasetSpec::Kind::ring;
    else if (kind == "grid") d.kind = DatasetSpec::Kind::grid;
    else throw std::invalid_argument("config: dataset.kind must be 'ring' or 'grid', got '" + kind + "'");
  }
  read_to(j, "k", d.k);
  read_to(j, "radius", d.radius);
  read_to(j, "rows", d.rows);
  read_to(j, "cols", d.cols);
  read_to(j, "spacing", d.spacing);
  read_to(j, "sigma", d.sigma);
}

void parse_model(const json& j, TrainConfig& c) {
  require_known_keys(j, "model", {"z_dim", "m", "gen_hidden", "disc_hidden"});
  read_to(j, "z_dim", c.z_dim);
  read_to(j, "m", c.m);
  read_to(j, "gen_hidden", c.gen_hidden);
  read_to(j, "disc_hidden", c.disc_hidden);
}

void parse_weights(const json& j, LossWeights& w) {
  require_known_keys(j, "weights",
                     {"w_maf", "w_ent", "w_lle", "w_isomap", "w_gp", "lambda_norm"});
  read_to(j, "w_maf", w.w_maf);
  read_to(j, "w_ent", w.w_ent);
  read_to(j, "w_lle", w.w_lle);
  read_to(j, "w_isomap", w.w_isomap);
  read_to(j, "w_gp", w.w_gp);
  read_to(j, "lambda_norm", w.lambda_norm);
}

void parse_buffer(const json& j, TrainConfig& c) {
  require_known_keys(j, "buffer", {"capacity", "source"});
  read_to(j, "capacity", c.buffer_capacity);
  if (j.contains("source")) {
    c.buffer_source = buffer_source_from_string(j.at("source").get<std::string>());
  }
}

void parse_train(const json& j, TrainConfig& c) {
  require_known_keys(j, "train",
                     {"n_critic", "batch_size", "total_steps", "eval_every", "eval_samples"});
  read_to(j, "n_critic", c.n_critic);
  read_to(j, "batch_size", c.batch_size);
  read_to(j, "total_steps", c.total_steps);
  read_to(j, "eval_every", c.eval_every);
  read_to(j, "eval_samples", c.eval_samples);
}

void parse_optimizer(const json& j, AdamParams& a) {
  require_known_keys(j, "optimizer", {"step_size", "beta1", "beta2", "epsilon"});
  read_to(j, "step_size", a.step_size);
  read_to(j, "beta1", a.beta1);
  read_to(j, "beta2", a.beta2);
  read_to(j, "epsilon", a.epsilon);
}

void parse_toggles(const json& j, TrainConfig& c) {
  require_known_keys(j, "toggles",
                     {"enable_dlle", "enable_disomap", "enable_rbmaem", "enable_gp",
                      "ent_in_discriminator", "manifold_reg_into_generator",
                      "push_at_disc_steps"});
  read_to(j, "enable_dlle", c.enable_dlle);
  read_to(j, "enable_disomap", c.enable_disomap);
  read_to(j, "enable_rbmaem", c.enable_rbmaem);
  read_to(j, "enable_gp", c.enable_gp);
  read_to(j, "ent_in_discriminator", c.ent_in_discriminator);
  read_to(j, "manifold_reg_into_generator", c.manifold_reg_into_generator);
  read_to(j, "push_at_disc_steps", c.push_at_disc_steps);
}

void parse_augmentation(const json& j, Augmentation& a) {
  require_known_keys(j, "augmentation", {"kind", "noise_sigma", "max_angle", "adv_eps"});
  if (j.contains("kind")) {
    a.kind = augmentation_kind_from_string(j.at("kind").get<std::string>());
  }
  read_to(j, "noise_sigma", a.noise_sigma);
  read_to(j, "max_angle", a.max_angle);
  read_to(j, "adv_eps", a.adv_eps);
}

void parse_metrics(const json& j, MetricsParams& m) {
  require_known_keys(j, "metrics",
                     {"radius_mult", "min_count", "i_variance_squared_inside",
                      "embedding_entropy_samples"});
  read_to(j, "radius_mult", m.radius_mult);
  read_to(j, "min_count", m.min_count);
  read_to(j, "i_variance_squared_inside", m.i_variance_squared_inside);
  read_to(j, "embedding_entropy_samples", m.embedding_entropy_samples);
}

const std::set<std::string> kTopLevelKeys = {
    "seed",      "dataset",   "model",   "weights",      "buffer",
    "train",     "optimizer", "toggles", "gp_center",    "augmentation",
    "metrics",   "out_dir"};

void parse_into(const json& j, TrainConfig& c) {
  require_known_keys(j, "", kTopLevelKeys);
  read_to(j, "seed", c.seed);
  if (j.contains("dataset")) parse_dataset(j.at("dataset"), c.dataset);
  if (j.contains("model")) parse_model(j.at("model"), c);
  if (j.contains("weights")) parse_weights(j.at("weights"), c.weights);
  if (j.contains("buffer")) parse_buffer(j.at("buffer"), c);
  if (j.contains("train")) parse_train(j.at("train"), c);
  if (j.contains("optimizer")) parse_optimizer(j.at("optimizer"), c.optimizer);
  if (j.contains("toggles")) parse_toggles(j.at("toggles"), c);
  read_to(j, "gp_center", c.gp_center);
  if (j.contains("augmentation")) parse_augmentation(j.at("augmentation"), c.aug);
  if (j.contains("metrics")) parse_metrics(j.at("metrics"), c.metrics);
  read_to(j, "out_dir", c.out_dir);
}

}  // namespace

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  parse_into(j, c);
  c.validate();
  return c;
}

void apply_overrides(TrainConfig& c, const json& overrides) {
  parse_into(overrides, c);
  c.validate();
}

ordered_json config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  ordered_json ds;
  ds["kind"] = c.dataset.kind == DatasetSpec::Kind::ring ? "ring" : "grid";
  ds["k"] = c.dataset.k;
  ds["radius"] = c.dataset.radius;
  ds["rows"] = c.dataset.rows;
  ds["cols"] = c.dataset.cols;
  ds["spacing"] = c.dataset.spacing;
  ds["sigma"] = c.dataset.sigma;
  j["dataset"] = ds;
  j["model"] = {{"z_dim", c.z_dim},
                {"m", c.m},
                {"gen_hidden", c.gen_hidden},
                {"disc_hidden", c.disc_hidden}};
  j["weights"] = {{"w_maf", c.weights.w_maf},     {"w_ent", c.weights.w_ent},
                  {"w_lle", c.weights.w_lle},     {"w_isomap", c.weights.w_isomap},
                  {"w_gp", c.weights.w_gp},       {"lambda_norm", c.weights.lambda_norm}};
  j["buffer"] = {{"capacity", c.buffer_capacity},
                 {"source", buffer_source_name(c.buffer_source)}};
  j["train"] = {{"n_critic", c.n_critic},
                {"batch_size", c.batch_size},
                {"total_steps", c.total_steps},
                {"eval_every", c.eval_every},
                {"eval_samples", c.eval_samples}};
  j["optimizer"] = {{"step_size", c.optimizer.step_size},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"epsilon", c.optimizer.epsilon}};
  j["toggles"] = {{"enable_dlle", c.enable_dlle},
                  {"enable_disomap", c.enable_disomap},
                  {"enable_rbmaem", c.enable_rbmaem},
                  {"enable_gp", c.enable_gp},
                  {"ent_in_discriminator", c.ent_in_discriminator},
                  {"manifold_reg_into_generator", c.manifold_reg_into_generator},
                  {"push_at_disc_steps", c.push_at_disc_steps}};
  j["gp_center"] = c.gp_center;
  j["augmentation"] = {{"kind", augmentation_kind_name(c.aug.kind)},
                       {"noise_sigma", c.aug.noise_sigma},
                       {"max_angle", c.aug.max_angle},
                       {"adv_eps", c.aug.adv_eps}};
  j["metrics"] = {{"radius_mult", c.metrics.radius_mult},
                  {"min_count", c.metrics.min_count},
                  {"i_variance_squared_inside", c.metrics.i_variance_squared_inside},
                  {"embedding_entropy_samples", c.metrics.embedding_entropy_samples}};
  j["out_dir"] = c.out_dir;
  return j;
}

TrainConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: parse error in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::string& path, const TrainConfig& c) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("config: cannot open '" + path + "' for writing");
  os << config_to_json(c).dump(2) << '\n';
}

ExperimentPlan plan_from_json(const json& j) {
  require_known_keys(j, "plan", {"base", "variants", "seeds", "out_root"});
  ExperimentPlan plan;
  if (j.contains("base")) {
    parse_into(j.at("base"), plan.base);
  }
  if (!j.contains("variants") || !j.at("variants").is_array() || j.at("variants").empty()) {
    throw std::invalid_argument("plan: needs a non-empty 'variants' array");
  }
  std::set<std::string> names;
  for (const auto& v : j.at("variants")) {
    require_known_keys(v, "variants[]", {"name", "overrides"});
    ExperimentVariant variant;
    variant.name = v.at("name").get<std::string>();
    if (variant.name.empty()) throw std::invalid_argument("plan: variant name must not be empty");
    if (!names.insert(variant.name).second) {
      throw std::invalid_argument("plan: duplicate variant name '" + variant.name + "'");
    }
    variant.overrides = v.contains("overrides") ? v.at("overrides") : json::object();
    // Validate overrides eagerly so a typo fails before any run starts.
    TrainConfig probe = plan.base;
    parse_into(variant.overrides, probe);
    probe.validate();
    plan.variants.push_back(std::move(variant));
  }
  if (j.contains("seeds")) {
    plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  }
  if (plan.seeds.empty()) throw std::invalid_argument("plan: needs at least one seed");
  read_to(j, "out_root", plan.out_root);
  plan.base.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("plan: cannot open '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("plan: parse error in '" + path + "': " + e.what());
  }
  return plan_from_json(j);
}

}  // namespace maem
