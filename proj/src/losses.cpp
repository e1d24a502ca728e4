#include "maem/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace maem {

using ad::Tensor;

void LossWeights::validate() const {
  for (double w : {w_maf, w_ent, w_lle, w_isomap, w_gp, lambda_norm}) {
    if (w < 0.0) throw std::invalid_argument("LossWeights: weights must be >= 0");
  }
}

namespace {

// Accepts [n] or [n,1] score layouts.
Tensor score_mean(const Tensor& scores, const char* op) {
  if (!scores.defined() || scores.size() < 1) {
    throw std::invalid_argument(std::string(op) + ": empty batch");
  }
  const auto& s = scores.shape();
  if (s.size() == 2 && s[1] != 1) {
    throw std::invalid_argument(std::string(op) + ": scores must be [n] or [n,1], got " +
                                ad::shape_str(s));
  }
  return ad::mean(scores);
}

std::vector<long> shuffled_indices(long n, Rng& rng) {
  std::vector<long> idx(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

std::vector<double> draw_alphas(long n, Rng& rng) {
  std::vector<double> a(static_cast<std::size_t>(n));
  for (double& v : a) {
    v = rng.uniform01();
    if (v < 1e-12) v = 1e-12;  // keep alpha in (0,1)
  }
  return a;
}

}  // namespace

Tensor l_wgan(const Tensor& real_scores, const Tensor& fake_scores) {
  return ad::sub(score_mean(fake_scores, "l_wgan"), score_mean(real_scores, "l_wgan"));
}

Tensor l_maf(const Tensor& real_emb, const Tensor& fake_emb) {
  if (real_emb.shape().size() != 2 || fake_emb.shape().size() != 2 ||
      real_emb.cols() != fake_emb.cols()) {
    throw std::invalid_argument("l_maf: embedding width mismatch, " +
                                ad::shape_str(real_emb.shape()) + " vs " +
                                ad::shape_str(fake_emb.shape()));
  }
  return ad::sub(ad::mean(ad::row_mean(fake_emb)), ad::mean(ad::row_mean(real_emb)));
}

std::optional<Tensor> l_ent(const Tensor& v0, const ReplayBuffer& buf,
                            double lambda_norm) {
  if (buf.empty()) return std::nullopt;
  if (v0.size() != static_cast<long>(buf.dim())) {
    throw std::invalid_argument("l_ent: embedding width " + std::to_string(v0.size()) +
                                " does not match buffer dim " + std::to_string(buf.dim()));
  }
  auto qv = v0.values();
  NearestResult nn = buf.nearest_by_cosine(EmbeddingCode(qv.begin(), qv.end()));
  Tensor vstar = Tensor::from_values(v0.shape(),
                                     std::vector<double>(nn.code.begin(), nn.code.end()));
  Tensor loss = ad::cosine_similarity(v0, vstar);
  if (lambda_norm != 0.0) {
    loss = ad::add(loss, ad::scalar_mul(lambda_norm, ad::l2_norm(v0)));
  }
  return loss;
}

std::optional<Tensor> l_ent_batch(const Tensor& emb, const ReplayBuffer& buf,
                                  double lambda_norm) {
  if (buf.empty()) return std::nullopt;
  const long n = emb.rows(), m = emb.cols();
  if (m != static_cast<long>(buf.dim())) {
    throw std::invalid_argument("l_ent_batch: embedding width mismatch");
  }
  // Gather all nearest neighbors into one constant matrix, then evaluate the
  // per-row cosines with row ops; one graph instead of n.
  std::vector<double> vstar_flat;
  vstar_flat.reserve(static_cast<std::size_t>(n * m));
  auto ev = emb.values();
  for (long i = 0; i < n; ++i) {
    NearestResult nn = buf.nearest_by_cosine(
        EmbeddingCode(ev.begin() + i * m, ev.begin() + (i + 1) * m));
    vstar_flat.insert(vstar_flat.end(), nn.code.begin(), nn.code.end());
  }
  Tensor vstar = Tensor::from_values({n, m}, std::move(vstar_flat));
  Tensor rd = ad::row_dot(emb, vstar);
  Tensor na = ad::clamp_min(ad::row_l2_norm(emb), 1e-12);
  Tensor nb = ad::clamp_min(ad::row_l2_norm(vstar), 1e-12);
  Tensor loss = ad::mean(ad::mul(rd, ad::recip(ad::mul(na, nb))));
  if (lambda_norm != 0.0) {
    loss = ad::add(loss, ad::scalar_mul(lambda_norm, ad::mean(ad::row_l2_norm(emb))));
  }
  return loss;
}

Tensor augment_neighbor(const Discriminator& disc, const Tensor& x,
                        const Augmentation& aug, Rng& rng) {
  if (aug.kind != AugmentationKind::adversarial) return augment(x, aug, rng);
  aug.validate();
  // FGSM-style step on the realness score, computed on a scratch tape and
  // applied as a constant offset.
  Tensor leaf = x.detach();
  leaf.set_requires_grad(true);
  Tensor delta;
  {
    ad::Tape scratch;
    Tensor score = ad::sum(disc.realness_of(leaf));
    Tensor g = scratch.grad(score, leaf, /*create_graph=*/false);
    delta = Tensor::zeros(x.shape());
    auto gv = g.values();
    auto dv = delta.values_mut();
    for (long i = 0; i < delta.size(); ++i) {
      dv[i] = aug.adv_eps * (gv[i] > 0.0 ? 1.0 : (gv[i] < 0.0 ? -1.0 : 0.0));
    }
  }
  return ad::add(x, delta);
}

Tensor l_dlle_with_emb(const Discriminator& disc, const Tensor& x,
                       const Tensor& emb_x, const Augmentation& aug, Rng& rng) {
  Tensor neighbor = augment_neighbor(disc, x, aug, rng);
  Tensor diff = ad::sub(disc.embed(neighbor), emb_x);
  return ad::mean(ad::row_l2_norm(diff));
}

Tensor l_dlle(const Discriminator& disc, const Tensor& x, const Augmentation& aug,
              Rng& rng) {
  return l_dlle_with_emb(disc, x, disc.embed(x), aug, rng);
}

namespace {

std::vector<double> validated_one_minus(std::span<const double> alpha) {
  std::vector<double> one_minus(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    // The endpoints degenerate to a plain self-cosine; accepted for tests,
    // the training draw stays in the open interval.
    if (!(alpha[i] >= 0.0 && alpha[i] <= 1.0)) {
      throw std::invalid_argument("l_disomap: alpha must lie in [0,1]");
    }
    one_minus[i] = 1.0 - alpha[i];
  }
  return one_minus;
}

Tensor disomap_core(const Discriminator& disc, const Tensor& x_i, const Tensor& x_j,
                    const Tensor& emb_i, const Tensor& emb_j,
                    std::span<const double> alpha) {
  const std::vector<double> one_minus = validated_one_minus(alpha);
  Tensor a_d = ad::tile_col(alpha, x_i.cols());
  Tensor b_d = ad::tile_col(one_minus, x_i.cols());
  Tensor mix = ad::add(ad::mul(a_d, x_i), ad::mul(b_d, x_j));

  Tensor emb_mix = disc.embed(mix);
  Tensor a_m = ad::tile_col(alpha, emb_i.cols());
  Tensor b_m = ad::tile_col(one_minus, emb_i.cols());
  Tensor target = ad::add(ad::mul(a_m, emb_i), ad::mul(b_m, emb_j));

  Tensor rd = ad::row_dot(emb_mix, target);
  Tensor na = ad::clamp_min(ad::row_l2_norm(emb_mix), 1e-12);
  Tensor nb = ad::clamp_min(ad::row_l2_norm(target), 1e-12);
  Tensor cos = ad::mul(rd, ad::recip(ad::mul(na, nb)));
  return ad::mean(ad::add_scalar(ad::scalar_mul(-1.0, cos), 1.0));
}

}  // namespace

Tensor l_disomap(const Discriminator& disc, const Tensor& x_i, const Tensor& x_j,
                 std::span<const double> alpha) {
  if (x_i.shape() != x_j.shape()) {
    throw std::invalid_argument("l_disomap: batch shapes differ, " +
                                ad::shape_str(x_i.shape()) + " vs " +
                                ad::shape_str(x_j.shape()));
  }
  if (static_cast<long>(alpha.size()) != x_i.rows()) {
    throw std::invalid_argument("l_disomap: alpha length mismatch");
  }
  return disomap_core(disc, x_i, x_j, disc.embed(x_i), disc.embed(x_j), alpha);
}

Tensor l_disomap_with_emb(const Discriminator& disc, const Tensor& x_i,
                          const Tensor& emb_i, std::span<const long> perm,
                          std::span<const double> alpha) {
  // Rows pass through the net independently, so the partner batch embedding
  // is the row-permuted embedding of the base batch.
  Tensor x_j = ad::row_permute(x_i, perm);
  Tensor emb_j = ad::row_permute(emb_i, perm);
  return disomap_core(disc, x_i, x_j, emb_i, emb_j, alpha);
}

ObjectiveResult discriminator_objective(const Discriminator& disc,
                                        const Tensor& x_real, const Tensor& x_fake,
                                        const ReplayBuffer& buf,
                                        const ObjectiveOptions& opts, Rng& rng) {
  opts.weights.validate();
  const LossWeights& w = opts.weights;
  ObjectiveResult out;

  Tensor emb_real = disc.embed(x_real);
  Tensor emb_fake = disc.embed(x_fake);
  Tensor maf = l_maf(emb_real, emb_fake);
  out.components["l_maf"] = maf.item();
  Tensor total = ad::scalar_mul(w.w_maf, maf);

  if (opts.enable_gp && w.w_gp > 0.0) {
    Tensor gp = gradient_penalty(disc, x_real, x_fake, opts.gp_center, rng);
    out.components["gp"] = gp.item();
    total = ad::add(total, ad::scalar_mul(w.w_gp, gp));
  }

  const bool want_dlle = opts.enable_dlle && w.w_lle > 0.0;
  const bool want_isomap = opts.enable_disomap && w.w_isomap > 0.0;
  if (want_dlle || want_isomap) {
    // Both regularizers take the pooled batch: the expectation in each runs
    // over real and generated samples alike. The pooled embedding is shared
    // across terms (rows embed independently).
    const Tensor parts[] = {x_real, x_fake};
    Tensor pooled = ad::concat(parts);
    const Tensor emb_parts[] = {emb_real, emb_fake};
    Tensor emb_pooled = ad::concat(emb_parts);
    if (want_dlle) {
      Tensor dlle = l_dlle_with_emb(disc, pooled, emb_pooled, opts.aug, rng);
      out.components["l_dlle"] = dlle.item();
      total = ad::add(total, ad::scalar_mul(w.w_lle, dlle));
    }
    if (want_isomap) {
      auto perm = shuffled_indices(pooled.rows(), rng);
      auto alpha = draw_alphas(pooled.rows(), rng);
      Tensor iso = l_disomap_with_emb(disc, pooled, emb_pooled, perm, alpha);
      out.components["l_disomap"] = iso.item();
      total = ad::add(total, ad::scalar_mul(w.w_isomap, iso));
    }
  }

  if (opts.ent_in_discriminator && opts.enable_rbmaem && w.w_ent > 0.0 &&
      buf.size() >= std::max<std::size_t>(opts.entropy_warmup, 1)) {
    if (auto ent = l_ent_batch(disc.embed(x_fake), buf, w.lambda_norm)) {
      out.components["l_ent"] = ent->item();
      total = ad::add(total, ad::scalar_mul(w.w_ent, *ent));
    }
  }

  out.total = total;
  out.components["disc_total"] = total.item();
  return out;
}

ObjectiveResult generator_objective(const Discriminator& disc, const Tensor& x_fake,
                                    const ReplayBuffer& buf,
                                    const ObjectiveOptions& opts, Rng& rng) {
  opts.weights.validate();
  const LossWeights& w = opts.weights;
  ObjectiveResult out;

  Tensor emb = disc.embed(x_fake);
  Tensor realness = ad::mean(disc.realness(emb));
  out.components["gen_realness"] = realness.item();
  Tensor total = ad::scalar_mul(-w.w_maf, realness);

  if (opts.enable_rbmaem && w.w_ent > 0.0 && !opts.ent_in_discriminator &&
      buf.size() >= std::max<std::size_t>(opts.entropy_warmup, 1)) {
    if (auto ent = l_ent_batch(emb, buf, w.lambda_norm)) {
      out.components["l_ent"] = ent->item();
      total = ad::add(total, ad::scalar_mul(w.w_ent, *ent));
    }
  }

  if (opts.manifold_reg_into_generator) {
    if (opts.enable_dlle && w.w_lle > 0.0) {
      Tensor dlle = l_dlle(disc, x_fake, opts.aug, rng);
      out.components["gen_l_dlle"] = dlle.item();
      total = ad::add(total, ad::scalar_mul(w.w_lle, dlle));
    }
    if (opts.enable_disomap && w.w_isomap > 0.0) {
      auto perm = shuffled_indices(x_fake.rows(), rng);
      auto alpha = draw_alphas(x_fake.rows(), rng);
      Tensor iso = l_disomap_with_emb(disc, x_fake, emb, perm, alpha);
      out.components["gen_l_disomap"] = iso.item();
      total = ad::add(total, ad::scalar_mul(w.w_isomap, iso));
    }
  }

  out.total = total;
  out.components["gen_total"] = total.item();
  return out;
}

}  // namespace maem
