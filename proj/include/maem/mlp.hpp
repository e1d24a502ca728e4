#pragma once

#include <string>
#include <vector>

#include "maem/rng.hpp"
#include "maem/tensor.hpp"

namespace maem {

enum class Activation { relu, tanh, linear };

const char* activation_name(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpSpec {
  std::vector<long> layer_widths;  // input width first, output width last
  Activation hidden_activation = Activation::relu;
  Activation output_activation = Activation::linear;

  void validate() const;  // throws on fewer than 2 widths etc.
  bool operator==(const MlpSpec&) const = default;
};

// Plain fully connected net. Parameters are leaf tensors; weights are
// initialized uniform in +-sqrt(6/(fan_in+fan_out)), biases zero, fully
// determined by (seed, spec).
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpSpec spec, std::uint64_t seed);

  // x is [batch, in_width]; returns [batch, out_width]. Differentiable.
  ad::Tensor forward(const ad::Tensor& x) const;

  const MlpSpec& spec() const { return spec_; }
  long in_width() const { return spec_.layer_widths.front(); }
  long out_width() const { return spec_.layer_widths.back(); }

  // Weight and bias tensors interleaved per layer: W0, b0, W1, b1, ...
  // W is [in, out], b is [1, out].
  std::vector<ad::Tensor>& parameters() { return params_; }
  const std::vector<ad::Tensor>& parameters() const { return params_; }

  void zero_grad();
  long parameter_count() const;

 private:
  MlpSpec spec_;
  std::vector<ad::Tensor> params_;
};

// Maps latent vectors to data space.
struct Generator {
  Mlp net;

  Generator() = default;
  Generator(MlpSpec spec, std::uint64_t seed) : net(std::move(spec), seed) {}

  long z_dim() const { return net.in_width(); }
  long data_dim() const { return net.out_width(); }

  ad::Tensor generate(const ad::Tensor& z) const;
};

// Embeds samples into an m-dimensional code space; the per-sample realness
// score is the mean over the m dimensions. m = 1 recovers the classic scalar
// discriminator.
struct Discriminator {
  Mlp net;

  Discriminator() = default;
  Discriminator(MlpSpec spec, std::uint64_t seed) : net(std::move(spec), seed) {}

  long data_dim() const { return net.in_width(); }
  long embed_dim() const { return net.out_width(); }

  ad::Tensor embed(const ad::Tensor& x) const;          // [n,d] -> [n,m]
  ad::Tensor realness(const ad::Tensor& emb) const;     // [n,m] -> [n,1]
  ad::Tensor realness_of(const ad::Tensor& x) const;    // embed then realness
};

// Mean over the batch of (||grad_xhat realness(xhat)||_2 - center)^2 with
// xhat = u*x_real + (1-u)*x_fake, u ~ U(0,1) per row. Requires a live tape;
// the inner gradient is recorded on it so the result supports a second
// backward into the discriminator parameters.
ad::Tensor gradient_penalty(const Discriminator& disc, const ad::Tensor& x_real,
                            const ad::Tensor& x_fake, double center, Rng& rng);

}  // namespace maem
