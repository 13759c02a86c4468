#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace signkit::learn {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline double elu(double x) { return x > 0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0 ? 1.0 : std::exp(x); }

// Dense network, ELU on hidden layers, linear output. All weights and biases
// live in one flat vector so optimizers and checkpoints see a single array.
// Samples are columns.
class Mlp {
 public:
  struct Cache {
    std::vector<MatX> pre;  // z_l
    std::vector<MatX> act;  // a_0 = input, a_l = elu(z_l)
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("mlp needs at least input and output sizes");
    for (int s : sizes_)
      if (s < 1) throw std::invalid_argument("mlp layer sizes must be positive");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      w_off_.push_back(off);
      off += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
      b_off_.push_back(off);
      off += sizes_[l + 1];
    }
    theta_ = VecX::Zero(off);
  }

  // Uniform fan-average init; the last layer scaled by out_gain.
  void init(std::mt19937_64& rng, double out_gain = 1.0) {
    for (int l = 0; l < layers(); ++l) {
      const double lim = std::sqrt(6.0 / (sizes_[l] + sizes_[l + 1])) *
                         (l + 1 == layers() ? out_gain : 1.0);
      std::uniform_real_distribution<double> u(-lim, lim);
      auto w = weight(l);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
      bias(l).setZero();
    }
  }

  int layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Eigen::Index param_count() const { return theta_.size(); }

  VecX& params() { return theta_; }
  const VecX& params() const { return theta_; }

  Eigen::Map<MatX> weight(int l) { return weight_in(theta_, l); }
  Eigen::Map<const MatX> weight(int l) const {
    return {theta_.data() + w_off_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<VecX> bias(int l) { return bias_in(theta_, l); }
  Eigen::Map<const VecX> bias(int l) const { return {theta_.data() + b_off_[l], sizes_[l + 1]}; }

  // Views of a gradient vector laid out like the parameters.
  Eigen::Map<MatX> weight_in(VecX& g, int l) const {
    return {g.data() + w_off_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<VecX> bias_in(VecX& g, int l) const { return {g.data() + b_off_[l], sizes_[l + 1]}; }

  MatX forward(const MatX& x, Cache* cache = nullptr) const {
    if (x.rows() != input_dim())
      throw std::invalid_argument("mlp: expected input of size " + std::to_string(input_dim()) +
                                  ", got " + std::to_string(x.rows()));
    MatX a = x;
    if (cache) {
      cache->pre.clear();
      cache->act.assign(1, x);
    }
    for (int l = 0; l < layers(); ++l) {
      MatX z = weight(l) * a;
      z.colwise() += bias(l);
      if (l + 1 == layers()) {
        a = std::move(z);
        if (cache) cache->pre.push_back(a);
      } else {
        a = z.unaryExpr([](double v) { return elu(v); });
        if (cache) {
          cache->pre.push_back(std::move(z));
          cache->act.push_back(a);
        }
      }
    }
    return a;
  }

  VecX forward(const VecX& x) const { return forward(MatX(x)).col(0); }

  // Accumulates dL/dtheta into grad given dL/d(output); returns dL/d(input).
  MatX backward(const Cache& c, const MatX& d_out, VecX& grad) const {
    if (grad.size() != theta_.size()) grad = VecX::Zero(theta_.size());
    MatX d = d_out;
    for (int l = layers() - 1; l >= 0; --l) {
      if (l + 1 < layers())
        d = d.cwiseProduct(c.pre[l].unaryExpr([](double v) { return elu_grad(v); }));
      weight_in(grad, l).noalias() += d * c.act[l].transpose();
      bias_in(grad, l) += d.rowwise().sum();
      d = weight(l).transpose() * d;
    }
    return d;
  }

 private:
  std::vector<int> sizes_;
  std::vector<Eigen::Index> w_off_, b_off_;
  VecX theta_;
};

struct Adam {
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  VecX m, v;
  long t = 0;

  void step(VecX& theta, const VecX& g) {
    if (m.size() != theta.size()) {
      m = VecX::Zero(theta.size());
      v = VecX::Zero(theta.size());
      t = 0;
    }
    ++t;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g.cwiseAbs2();
    const double c1 = 1 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1 - std::pow(beta2, static_cast<double>(t));
    theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
};

}  // namespace signkit::learn
