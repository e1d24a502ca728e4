#include "maem/data.hpp"

#include <cmath>
#include <stdexcept>

namespace maem {

using ad::Tensor;

void GaussianMixtureSpec::validate() const {
  if (means.empty()) throw std::invalid_argument("GaussianMixtureSpec: no components");
  // sigma == 0 is the degenerate all-mass-on-means case, allowed for tests.
  if (sigma < 0.0) throw std::invalid_argument("GaussianMixtureSpec: sigma must be >= 0");
  const std::size_t d = means[0].size();
  if (d == 0) throw std::invalid_argument("GaussianMixtureSpec: zero-dimensional means");
  for (const auto& m : means) {
    if (m.size() != d) throw std::invalid_argument("GaussianMixtureSpec: ragged means");
  }
  if (weights.size() != means.size()) {
    throw std::invalid_argument("GaussianMixtureSpec: weights/means length mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("GaussianMixtureSpec: negative weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("GaussianMixtureSpec: weights sum to " +
                                std::to_string(total) + ", expected 1");
  }
}

GaussianMixtureSpec make_ring(int k, double radius, double sigma) {
  if (k < 1) throw std::invalid_argument("make_ring: k must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("make_ring: radius must be > 0, got " + std::to_string(radius));
  GaussianMixtureSpec spec;
  spec.sigma = sigma;
  for (int i = 0; i < k; ++i) {
    const double angle = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(k);
    spec.means.push_back({radius * std::cos(angle), radius * std::sin(angle)});
  }
  spec.weights.assign(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
  spec.validate();
  return spec;
}

GaussianMixtureSpec make_grid(int rows, int cols, double spacing, double sigma) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("make_grid: rows and cols must be >= 1");
  GaussianMixtureSpec spec;
  spec.sigma = sigma;
  const double x0 = -spacing * static_cast<double>(cols - 1) / 2.0;
  const double y0 = -spacing * static_cast<double>(rows - 1) / 2.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      spec.means.push_back({x0 + spacing * c, y0 + spacing * r});
    }
  }
  spec.weights.assign(spec.means.size(), 1.0 / static_cast<double>(spec.means.size()));
  spec.validate();
  return spec;
}

ad::Tensor sample_real(const GaussianMixtureSpec& spec, long n, Rng& rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_real: n must be >= 1");
  const long d = spec.dim();
  Tensor out = Tensor::zeros({n, d});
  auto ov = out.values_mut();
  for (long i = 0; i < n; ++i) {
    // Inverse-CDF walk over the component weights.
    const double u = rng.uniform01();
    std::size_t comp = spec.means.size() - 1;
    double acc = 0.0;
    for (std::size_t c = 0; c < spec.weights.size(); ++c) {
      acc += spec.weights[c];
      if (u < acc) {
        comp = c;
        break;
      }
    }
    for (long j = 0; j < d; ++j) {
      ov[i * d + j] = spec.means[comp][static_cast<std::size_t>(j)] +
                      spec.sigma * rng.normal();
    }
  }
  return out;
}

ad::Tensor sample_latent(long n, long z_dim, Rng& rng) {
  if (n < 1 || z_dim < 1) throw std::invalid_argument("sample_latent: n and z_dim must be >= 1");
  Tensor out = Tensor::zeros({n, z_dim});
  auto ov = out.values_mut();
  for (double& v : ov) v = rng.normal();
  return out;
}

const char* augmentation_kind_name(AugmentationKind k) {
  switch (k) {
    case AugmentationKind::gaussian_noise: return "gaussian_noise";
    case AugmentationKind::rotation: return "rotation";
    case AugmentationKind::adversarial: return "adversarial";
    case AugmentationKind::compose: return "compose";
  }
  return "?";
}

AugmentationKind augmentation_kind_from_string(const std::string& s) {
  if (s == "gaussian_noise") return AugmentationKind::gaussian_noise;
  if (s == "rotation") return AugmentationKind::rotation;
  if (s == "adversarial") return AugmentationKind::adversarial;
  if (s == "compose") return AugmentationKind::compose;
  throw std::invalid_argument("unknown augmentation kind '" + s + "'");
}

void Augmentation::validate() const {
  if (noise_sigma < 0.0) throw std::invalid_argument("Augmentation: noise_sigma must be >= 0");
  if (max_angle < 0.0 || max_angle > M_PI) {
    throw std::invalid_argument("Augmentation: max_angle must be in [0, pi]");
  }
  if (adv_eps < 0.0) throw std::invalid_argument("Augmentation: adv_eps must be >= 0");
}

ad::Tensor rotate2d(const Tensor& x, std::span<const double> angles) {
  if (x.shape().size() != 2 || x.cols() != 2) {
    throw std::invalid_argument("rotate2d: rotation requires d=2, got shape " +
                                ad::shape_str(x.shape()));
  }
  const long n = x.rows();
  if (static_cast<long>(angles.size()) != n) {
    throw std::invalid_argument("rotate2d: angle count mismatch");
  }
  // Written as tensor ops so gradients pass through x:
  // col0' = c*x0 - s*x1, col1' = s*x0 + c*x1.
  std::vector<double> c(static_cast<std::size_t>(n)), s(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    c[static_cast<std::size_t>(i)] = std::cos(angles[static_cast<std::size_t>(i)]);
    s[static_cast<std::size_t>(i)] = std::sin(angles[static_cast<std::size_t>(i)]);
  }
  Tensor e0 = Tensor::from_values({2, 1}, {1.0, 0.0});
  Tensor e1 = Tensor::from_values({2, 1}, {0.0, 1.0});
  Tensor x0 = ad::matmul(x, e0);  // [n,1]
  Tensor x1 = ad::matmul(x, e1);
  Tensor ct = ad::tile_col(c, 1);
  Tensor st = ad::tile_col(s, 1);
  Tensor y0 = ad::sub(ad::mul(ct, x0), ad::mul(st, x1));
  Tensor y1 = ad::add(ad::mul(st, x0), ad::mul(ct, x1));
  Tensor e0t = Tensor::from_values({1, 2}, {1.0, 0.0});
  Tensor e1t = Tensor::from_values({1, 2}, {0.0, 1.0});
  return ad::add(ad::matmul(y0, e0t), ad::matmul(y1, e1t));
}

namespace {

Tensor rotate_rows(const Tensor& x, double max_angle, Rng& rng) {
  const long n = x.shape().size() == 2 ? x.shape()[0] : 0;
  std::vector<double> angles(static_cast<std::size_t>(n));
  for (double& a : angles) a = rng.uniform(-max_angle, max_angle);
  return rotate2d(x, angles);
}

Tensor add_noise(const Tensor& x, double noise_sigma, Rng& rng) {
  Tensor noise = Tensor::zeros(x.shape());
  auto nv = noise.values_mut();
  for (double& v : nv) v = noise_sigma * rng.normal();
  return ad::add(x, noise);
}

}  // namespace

ad::Tensor augment(const Tensor& x, const Augmentation& aug, Rng& rng) {
  aug.validate();
  switch (aug.kind) {
    case AugmentationKind::gaussian_noise:
      return add_noise(x, aug.noise_sigma, rng);
    case AugmentationKind::rotation:
      return rotate_rows(x, aug.max_angle, rng);
    case AugmentationKind::compose:
      return add_noise(rotate_rows(x, aug.max_angle, rng), aug.noise_sigma, rng);
    case AugmentationKind::adversarial:
      throw std::invalid_argument(
          "augment: adversarial transform needs the discriminator; use "
          "augment_neighbor from the losses module");
  }
  throw std::logic_error("augment: unhandled kind");
}

}  // namespace maem
