#pragma once

#include <functional>
#include <map>
#include <string>

#include "maem/data.hpp"
#include "maem/mlp.hpp"
#include "maem/tensor.hpp"

namespace maem {

// One logged evaluation snapshot; serialized as a JSON object per line in the
// run log.
struct MetricsRecord {
  long step = 0;
  int mode_coverage = 0;
  double high_quality_ratio = 0.0;
  double i_variance = 0.0;
  double embedding_entropy_nats = 0.0;
  std::map<std::string, double> losses;
};

// Number of mixture components owning at least `min_count` samples within
// radius_mult*sigma of their mean, under nearest-mean assignment.
int mode_coverage(const ad::Tensor& samples, const GaussianMixtureSpec& spec,
                  double radius_mult, int min_count);

// Fraction of samples within radius_mult*sigma of some mean.
double high_quality_ratio(const ad::Tensor& samples, const GaussianMixtureSpec& spec,
                          double radius_mult);

using FeatureMap = std::function<ad::Tensor(const ad::Tensor&)>;

// Diversity score: sqrt of the mean (unsquared) L2 deviation of features from
// their mean — the literal printed form. `squared_inside=true` gives the
// conventional standard deviation sqrt(mean ||.||^2) for comparison.
// feature_map defaults to identity.
double i_variance(const ad::Tensor& samples, const FeatureMap& feature_map = {},
                  bool squared_inside = false);

// Kozachenko-Leonenko first-nearest-neighbor differential entropy estimate in
// nats: (d/n)*sum_i ln rho_i + ln V_d + gamma + ln(n-1). Duplicate points get
// a deterministic 1e-9 jitter and a warning on stderr.
double knn_entropy(const ad::Tensor& samples);

// log of the d-ball volume, log(pi^(d/2) / Gamma(d/2+1)).
double log_unit_ball_volume(long d);

// Grid log-sum-exp estimate of the energy-model objective on a frozen
// discriminator: -mean_real[realness] + log(sum over grid of
// exp(realness)*cell_area). Warns on stderr when samples fall outside the
// grid. 2-D only.
double ebm_proxy(const Discriminator& disc, const ad::Tensor& real_samples,
                 double grid_lo, double grid_hi, long grid_n);

// True iff l_ebm_proxy >= l_wgan_value + entropy_estimate - tolerance.
// Diagnostic; the grid partition estimate is approximate, so this is not a
// CI assertion.
bool wgan_ebm_bound_check(double l_wgan_value, double entropy_estimate,
                          double l_ebm_proxy, double tolerance);

}  // namespace maem
