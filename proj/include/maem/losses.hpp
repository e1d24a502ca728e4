#pragma once

#include <map>
#include <optional>
#include <string>

#include "maem/data.hpp"
#include "maem/mlp.hpp"
#include "maem/replay_buffer.hpp"
#include "maem/rng.hpp"
#include "maem/tensor.hpp"

namespace maem {

struct LossWeights {
  double w_maf = 1.0;
  double w_ent = 0.5;
  double w_lle = 1.0;
  double w_isomap = 1.0;
  double w_gp = 10.0;
  double lambda_norm = 0.1;  // weight of the ||V0|| stabilizer

  void validate() const;  // all must be >= 0
};

// mean(fake_scores) - mean(real_scores). The discriminator minimizes this,
// the generator maximizes it.
ad::Tensor l_wgan(const ad::Tensor& real_scores, const ad::Tensor& fake_scores);

// Vector-discriminator form: mean-over-dimensions then mean-over-batch of
// fake embeddings minus the same for real. With m=1 it equals l_wgan bitwise.
ad::Tensor l_maf(const ad::Tensor& real_emb, const ad::Tensor& fake_emb);

// cos(V0, V*) + lambda*||V0||2 with V* the buffer entry nearest to V0 by
// cosine. Gradients flow only into V0; buffer entries are constants.
// Empty buffer -> nullopt (caller skips the term).
std::optional<ad::Tensor> l_ent(const ad::Tensor& v0, const ReplayBuffer& buf,
                                double lambda_norm);

// Mean of l_ent over the rows of an embedding batch [n, m].
std::optional<ad::Tensor> l_ent_batch(const ad::Tensor& emb,
                                      const ReplayBuffer& buf,
                                      double lambda_norm);

// Applies the neighbor transform, including the adversarial variant (a
// one-step gradient-sign perturbation of the realness score, treated as a
// constant offset of x).
ad::Tensor augment_neighbor(const Discriminator& disc, const ad::Tensor& x,
                            const Augmentation& aug, Rng& rng);

// mean over the batch of ||D(F(x)) - D(x)||2.
ad::Tensor l_dlle(const Discriminator& disc, const ad::Tensor& x,
                  const Augmentation& aug, Rng& rng);

// mean over the batch of 1 - cos(D(a*xi + (1-a)*xj), a*D(xi) + (1-a)*D(xj)).
// Exactly zero for affine discriminators.
ad::Tensor l_disomap(const Discriminator& disc, const ad::Tensor& x_i,
                     const ad::Tensor& x_j, std::span<const double> alpha);

// Variants taking a precomputed embedding of their input batch; the
// objectives use these to share forward passes across loss terms.
ad::Tensor l_dlle_with_emb(const Discriminator& disc, const ad::Tensor& x,
                           const ad::Tensor& emb_x, const Augmentation& aug,
                           Rng& rng);
ad::Tensor l_disomap_with_emb(const Discriminator& disc, const ad::Tensor& x_i,
                              const ad::Tensor& emb_i, std::span<const long> perm,
                              std::span<const double> alpha);

struct ObjectiveOptions {
  LossWeights weights;
  bool enable_dlle = true;
  bool enable_disomap = true;
  bool enable_rbmaem = true;
  bool enable_gp = true;
  double gp_center = 1.0;
  Augmentation aug;
  // Entropy term stays inactive until the buffer holds this many entries.
  std::size_t entropy_warmup = 1;
  // Alternative placements, both off by default.
  bool ent_in_discriminator = false;
  bool manifold_reg_into_generator = false;
};

struct ObjectiveResult {
  ad::Tensor total;
  std::map<std::string, double> components;  // forward values for logging
};

// w_maf*l_maf + w_gp*gradient_penalty + w_lle*l_dlle + w_isomap*l_disomap,
// minimized over discriminator parameters. The manifold regularizers run on
// the pooled real+fake batch (the DLLE expectation covers both
// distributions). x_fake must be detached by the caller.
ObjectiveResult discriminator_objective(const Discriminator& disc,
                                        const ad::Tensor& x_real,
                                        const ad::Tensor& x_fake,
                                        const ReplayBuffer& buf,
                                        const ObjectiveOptions& opts, Rng& rng);

// -w_maf*(mean realness of the generated batch) + w_ent*l_ent_batch,
// minimized over generator parameters (the minus sign realizes "generator
// maximizes"; minimizing l_ent pushes nearest embeddings apart, raising the
// entropy surrogate). x_fake must carry gradients back into the generator.
ObjectiveResult generator_objective(const Discriminator& disc,
                                    const ad::Tensor& x_fake,
                                    const ReplayBuffer& buf,
                                    const ObjectiveOptions& opts, Rng& rng);

}  // namespace maem
