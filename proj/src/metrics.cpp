#include "maem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "maem/rng.hpp"

namespace maem {

using ad::Tensor;

namespace {

void require_sample_matrix(const Tensor& samples, const char* op) {
  if (!samples.defined() || samples.shape().size() != 2) {
    throw std::invalid_argument(std::string(op) + ": samples must be [n,d]");
  }
}

// Index of the nearest mean and the squared distance to it.
std::pair<std::size_t, double> nearest_mean(std::span<const double> row, long d,
                                            const GaussianMixtureSpec& spec) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < spec.means.size(); ++c) {
    double d2 = 0.0;
    for (long j = 0; j < d; ++j) {
      const double diff = row[static_cast<std::size_t>(j)] - spec.means[c][static_cast<std::size_t>(j)];
      d2 += diff * diff;
    }
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return {best, best_d2};
}

}  // namespace

int mode_coverage(const Tensor& samples, const GaussianMixtureSpec& spec,
                  double radius_mult, int min_count) {
  require_sample_matrix(samples, "mode_coverage");
  spec.validate();
  const long n = samples.rows(), d = samples.cols();
  if (d != spec.dim()) throw std::invalid_argument("mode_coverage: dimension mismatch");
  const double r2 = radius_mult * spec.sigma * radius_mult * spec.sigma;
  std::vector<long> counts(spec.means.size(), 0);
  auto sv = samples.values();
  for (long i = 0; i < n; ++i) {
    auto [comp, d2] = nearest_mean(sv.subspan(static_cast<std::size_t>(i * d),
                                              static_cast<std::size_t>(d)),
                                   d, spec);
    if (d2 <= r2) ++counts[comp];
  }
  int covered = 0;
  for (long c : counts) {
    if (c >= min_count) ++covered;
  }
  return covered;
}

double high_quality_ratio(const Tensor& samples, const GaussianMixtureSpec& spec,
                          double radius_mult) {
  require_sample_matrix(samples, "high_quality_ratio");
  spec.validate();
  const long n = samples.rows(), d = samples.cols();
  if (d != spec.dim()) throw std::invalid_argument("high_quality_ratio: dimension mismatch");
  const double r2 = radius_mult * spec.sigma * radius_mult * spec.sigma;
  long hits = 0;
  auto sv = samples.values();
  for (long i = 0; i < n; ++i) {
    auto [comp, d2] = nearest_mean(sv.subspan(static_cast<std::size_t>(i * d),
                                              static_cast<std::size_t>(d)),
                                   d, spec);
    (void)comp;
    if (d2 <= r2) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

double i_variance(const Tensor& samples, const FeatureMap& feature_map,
                  bool squared_inside) {
  require_sample_matrix(samples, "i_variance");
  if (samples.rows() < 2) throw std::invalid_argument("i_variance: need at least 2 samples");

  Tensor feats;
  {
    ad::NoGradGuard guard;
    feats = feature_map ? feature_map(samples) : samples;
  }
  require_sample_matrix(feats, "i_variance(features)");
  const long n = feats.rows(), d = feats.cols();
  auto fv = feats.values();

  std::vector<double> mean_f(static_cast<std::size_t>(d), 0.0);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d; ++j) mean_f[static_cast<std::size_t>(j)] += fv[i * d + j];
  }
  for (double& m : mean_f) m /= static_cast<double>(n);

  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (long j = 0; j < d; ++j) {
      const double diff = fv[i * d + j] - mean_f[static_cast<std::size_t>(j)];
      d2 += diff * diff;
    }
    acc += squared_inside ? d2 : std::sqrt(d2);
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double log_unit_ball_volume(long d) {
  const double half_d = static_cast<double>(d) / 2.0;
  return half_d * std::log(M_PI) - std::lgamma(half_d + 1.0);
}

double knn_entropy(const Tensor& samples) {
  require_sample_matrix(samples, "knn_entropy");
  const long n = samples.rows(), d = samples.cols();
  if (n < 10) throw std::invalid_argument("knn_entropy: need at least 10 samples");

  std::vector<double> pts(samples.values().begin(), samples.values().end());

  // Duplicate guard: exact-zero nearest distances get a deterministic jitter.
  auto nn_dist2 = [&](long i) {
    double best = std::numeric_limits<double>::infinity();
    for (long k = 0; k < n; ++k) {
      if (k == i) continue;
      double d2 = 0.0;
      for (long j = 0; j < d; ++j) {
        const double diff = pts[static_cast<std::size_t>(i * d + j)] -
                            pts[static_cast<std::size_t>(k * d + j)];
        d2 += diff * diff;
      }
      if (d2 < best) best = d2;
    }
    return best;
  };

  bool jittered = false;
  for (int attempt = 0; attempt < 2; ++attempt) {
    double log_sum = 0.0;
    bool has_zero = false;
    for (long i = 0; i < n; ++i) {
      const double d2 = nn_dist2(i);
      if (d2 <= 0.0) {
        has_zero = true;
        break;
      }
      log_sum += 0.5 * std::log(d2);
    }
    if (!has_zero) {
      constexpr double euler_gamma = 0.5772156649015329;
      return (static_cast<double>(d) / static_cast<double>(n)) * log_sum +
             log_unit_ball_volume(d) + euler_gamma +
             std::log(static_cast<double>(n - 1));
    }
    if (jittered) break;
    std::cerr << "knn_entropy: duplicate points, applying 1e-9 jitter\n";
    Rng jitter_rng(0x6a697474);  // fixed stream: estimate stays deterministic
    for (double& v : pts) v += 1e-9 * (jitter_rng.uniform01() - 0.5);
    jittered = true;
  }
  throw std::runtime_error("knn_entropy: duplicate points persisted after jitter");
}

double ebm_proxy(const Discriminator& disc, const Tensor& real_samples,
                 double grid_lo, double grid_hi, long grid_n) {
  require_sample_matrix(real_samples, "ebm_proxy");
  if (real_samples.cols() != 2 || disc.data_dim() != 2) {
    throw std::invalid_argument("ebm_proxy: 2-D support only");
  }
  if (grid_n < 2 || !(grid_hi > grid_lo)) {
    throw std::invalid_argument("ebm_proxy: bad grid");
  }

  ad::NoGradGuard guard;

  auto rv = real_samples.values();
  for (long i = 0; i < real_samples.rows(); ++i) {
    for (long j = 0; j < 2; ++j) {
      const double v = rv[i * 2 + j];
      if (v < grid_lo || v > grid_hi) {
        std::cerr << "ebm_proxy: sample outside the partition grid [" << grid_lo
                  << "," << grid_hi << "]\n";
        i = real_samples.rows();  // warn once
        break;
      }
    }
  }

  const double mean_real = ad::mean(disc.realness_of(real_samples)).item();

  const double step = (grid_hi - grid_lo) / static_cast<double>(grid_n - 1);
  Tensor grid = Tensor::zeros({grid_n * grid_n, 2});
  auto gv = grid.values_mut();
  for (long a = 0; a < grid_n; ++a) {
    for (long b = 0; b < grid_n; ++b) {
      gv[(a * grid_n + b) * 2 + 0] = grid_lo + step * static_cast<double>(a);
      gv[(a * grid_n + b) * 2 + 1] = grid_lo + step * static_cast<double>(b);
    }
  }
  Tensor scores = disc.realness_of(grid);
  auto scv = scores.values();
  double max_s = -std::numeric_limits<double>::infinity();
  for (double s : scv) max_s = std::max(max_s, s);
  double sum_exp = 0.0;
  for (double s : scv) sum_exp += std::exp(s - max_s);
  const double log_z = max_s + std::log(sum_exp) + 2.0 * std::log(step);

  return -mean_real + log_z;
}

bool wgan_ebm_bound_check(double l_wgan_value, double entropy_estimate,
                          double l_ebm_proxy, double tolerance) {
  return l_ebm_proxy >= l_wgan_value + entropy_estimate - tolerance;
}

}  // namespace maem
