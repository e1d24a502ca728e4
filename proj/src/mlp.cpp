#include "maem/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace maem {

using ad::Tensor;

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) {
    throw std::invalid_argument("MlpSpec: need at least input and output widths");
  }
  for (long w : layer_widths) {
    if (w < 1) throw std::invalid_argument("MlpSpec: non-positive layer width");
  }
  if (hidden_activation == Activation::linear) {
    throw std::invalid_argument("MlpSpec: hidden activation must be relu or tanh");
  }
  if (output_activation == Activation::relu) {
    throw std::invalid_argument("MlpSpec: output activation must be linear or tanh");
  }
}

Mlp::Mlp(MlpSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < spec_.layer_widths.size(); ++l) {
    const long fan_in = spec_.layer_widths[l];
    const long fan_out = spec_.layer_widths[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<double> w(static_cast<std::size_t>(fan_in * fan_out));
    for (double& v : w) v = rng.uniform(-bound, bound);
    params_.push_back(Tensor::from_values({fan_in, fan_out}, std::move(w), true));
    params_.push_back(Tensor::zeros({1, fan_out}, true));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  if (x.shape().size() != 2 || x.cols() != in_width()) {
    throw std::invalid_argument(
        "Mlp::forward: input shape " + ad::shape_str(x.shape()) +
        " does not match input width " + std::to_string(in_width()));
  }
  Tensor h = x;
  const std::size_t n_layers = params_.size() / 2;
  for (std::size_t l = 0; l < n_layers; ++l) {
    h = ad::linear(h, params_[2 * l], params_[2 * l + 1]);
    const bool last = (l + 1 == n_layers);
    const Activation act = last ? spec_.output_activation : spec_.hidden_activation;
    if (act == Activation::relu) h = ad::relu(h);
    else if (act == Activation::tanh) h = ad::tanh(h);
  }
  return h;
}

void Mlp::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

long Mlp::parameter_count() const {
  long n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

Tensor Generator::generate(const Tensor& z) const { return net.forward(z); }

Tensor Discriminator::embed(const Tensor& x) const { return net.forward(x); }

Tensor Discriminator::realness(const Tensor& emb) const {
  if (emb.shape().size() != 2 || emb.cols() != embed_dim()) {
    throw std::invalid_argument("Discriminator::realness: embedding shape " +
                                ad::shape_str(emb.shape()) + " expected [n," +
                                std::to_string(embed_dim()) + "]");
  }
  return ad::row_mean(emb);
}

Tensor Discriminator::realness_of(const Tensor& x) const {
  return realness(embed(x));
}

Tensor gradient_penalty(const Discriminator& disc, const Tensor& x_real,
                        const Tensor& x_fake, double center, Rng& rng) {
  if (x_real.shape() != x_fake.shape()) {
    throw std::invalid_argument("gradient_penalty: batch shapes differ, " +
                                ad::shape_str(x_real.shape()) + " vs " +
                                ad::shape_str(x_fake.shape()));
  }
  if (ad::Tape::current() == nullptr) {
    throw std::runtime_error("gradient_penalty: requires a live tape");
  }
  const long n = x_real.rows();
  const long d = x_real.cols();

  std::vector<double> u(static_cast<std::size_t>(n));
  for (double& v : u) v = rng.uniform01();

  Tensor xhat = Tensor::zeros({n, d});
  {
    auto rv = x_real.values();
    auto fv = x_fake.values();
    auto xv = xhat.values_mut();
    for (long r = 0; r < n; ++r) {
      for (long c = 0; c < d; ++c) {
        xv[r * d + c] = u[static_cast<std::size_t>(r)] * rv[r * d + c] +
                        (1.0 - u[static_cast<std::size_t>(r)]) * fv[r * d + c];
      }
    }
  }
  xhat.set_requires_grad(true);

  Tensor score_sum = ad::sum(disc.realness_of(xhat));
  // Per-row gradients in one pass: rows are independent through the net, so
  // d(sum_i r_i)/d xhat has row i equal to grad of r_i alone.
  Tensor gx = ad::grad(score_sum, xhat, /*create_graph=*/true);
  Tensor norms = ad::row_l2_norm(gx);
  Tensor dev = ad::add_scalar(norms, -center);
  return ad::mean(ad::square(dev));
}

}  // namespace maem
