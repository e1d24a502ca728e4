#pragma once

#include <string>
#include <vector>

#include "maem/rng.hpp"
#include "maem/tensor.hpp"

namespace maem {

// Ground-truth synthetic data distribution: isotropic Gaussians with shared
// sigma at known means. Every mode is known exactly, so mode collapse is
// measurable without any pretrained feature extractor.
struct GaussianMixtureSpec {
  std::vector<std::vector<double>> means;  // each of dimension d
  double sigma = 0.0;
  std::vector<double> weights;  // sums to 1; uniform by default

  long dim() const { return means.empty() ? 0 : static_cast<long>(means[0].size()); }
  void validate() const;
};

GaussianMixtureSpec make_ring(int k, double radius, double sigma);
GaussianMixtureSpec make_grid(int rows, int cols, double spacing, double sigma);

// [n, d] samples; component chosen by weights, then an isotropic draw.
ad::Tensor sample_real(const GaussianMixtureSpec& spec, long n, Rng& rng);

// [n, z_dim] i.i.d. standard normal latents.
ad::Tensor sample_latent(long n, long z_dim, Rng& rng);

enum class AugmentationKind { gaussian_noise, rotation, adversarial, compose };

const char* augmentation_kind_name(AugmentationKind k);
AugmentationKind augmentation_kind_from_string(const std::string& s);

// Neighbor-generating transform F for the local-embedding regularizer.
// `compose` applies rotation then noise. `adversarial` (off by default) is a
// one-step gradient-sign perturbation of the realness score and needs model
// access, so it is dispatched in the losses module.
struct Augmentation {
  AugmentationKind kind = AugmentationKind::compose;
  double noise_sigma = 0.05;
  double max_angle = M_PI / 6.0;  // radians, in [0, pi]
  double adv_eps = 0.01;          // step size of the adversarial variant

  void validate() const;
};

// Applies the transform; differentiable in x (the random draws are constants
// of the graph). Rotation requires d == 2 and rotates each sample about the
// origin by an angle uniform in [-max_angle, +max_angle].
ad::Tensor augment(const ad::Tensor& x, const Augmentation& aug, Rng& rng);

// Rotates each row of a [n,2] tensor about the origin by its angle.
ad::Tensor rotate2d(const ad::Tensor& x, std::span<const double> angles);

}  // namespace maem
