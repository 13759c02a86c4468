#pragma once

#include <cmath>
#include <random>

#include "signkit/learn/mlp.hpp"

namespace signkit::learn {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// Diagonal Gaussian with state-independent log-std. Columns are samples.
inline VecX gaussian_log_prob(const MatX& mean, const VecX& log_std, const MatX& a) {
  const VecX inv = (-log_std).array().exp();
  const MatX z = (a - mean).array().colwise() * inv.array();
  const double c = -log_std.sum() - 0.5 * static_cast<double>(log_std.size()) * kLog2Pi;
  return (-0.5 * z.colwise().squaredNorm().array() + c).matrix().transpose();
}

inline double gaussian_entropy(const VecX& log_std) {
  return log_std.sum() + 0.5 * static_cast<double>(log_std.size()) * (kLog2Pi + 1.0);
}

// KL(old || new) per sample.
inline VecX gaussian_kl(const MatX& mu_old, const VecX& ls_old, const MatX& mu_new,
                        const VecX& ls_new) {
  const VecX var_old = (2 * ls_old).array().exp();
  const VecX inv_var_new = (-2 * ls_new).array().exp();
  const MatX d2 = (mu_old - mu_new).cwiseAbs2();
  VecX kl(mu_old.cols());
  const double base = (ls_new - ls_old).sum() - 0.5 * static_cast<double>(ls_old.size());
  for (Eigen::Index i = 0; i < mu_old.cols(); ++i)
    kl[i] = base + 0.5 * ((var_old + d2.col(i)).cwiseProduct(inv_var_new)).sum();
  return kl;
}

struct GaussianPolicy {
  Mlp mean;
  VecX log_std;

  GaussianPolicy() = default;
  GaussianPolicy(std::vector<int> sizes, double init_log_std = 0.0)
      : mean(std::move(sizes)) {
    log_std = VecX::Constant(mean.output_dim(), init_log_std);
  }

  int action_dim() const { return mean.output_dim(); }
  int obs_dim() const { return mean.input_dim(); }

  MatX sample(const MatX& mu, std::mt19937_64& rng) const {
    std::normal_distribution<double> n(0.0, 1.0);
    MatX a(mu.rows(), mu.cols());
    for (Eigen::Index c = 0; c < mu.cols(); ++c)
      for (Eigen::Index r = 0; r < mu.rows(); ++r)
        a(r, c) = mu(r, c) + std::exp(log_std[r]) * n(rng);
    return a;
  }
};

}  // namespace signkit::learn
