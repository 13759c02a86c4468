#pragma once

#include <cmath>

#include <nlohmann/json.hpp>

#include "signkit/learn/mlp.hpp"

namespace signkit::learn {

// Running mean/variance merged batch-wise (parallel Welford).
struct RunningMeanStd {
  VecX mean, var;
  double count = 1e-4;

  RunningMeanStd() = default;
  explicit RunningMeanStd(int dim) : mean(VecX::Zero(dim)), var(VecX::Ones(dim)) {}

  void update(const MatX& batch) {  // columns are samples
    const double n = static_cast<double>(batch.cols());
    if (n == 0) return;
    const VecX bm = batch.rowwise().mean();
    const VecX bv = (batch.colwise() - bm).cwiseAbs2().rowwise().sum() / n;
    const VecX delta = bm - mean;
    const double total = count + n;
    mean += delta * (n / total);
    var = (var * count + bv * n + delta.cwiseAbs2() * (count * n / total)) / total;
    count = total;
  }

  MatX normalize(const MatX& x, double clip = 10.0) const {
    const VecX inv = (var.array() + 1e-8).rsqrt();
    MatX z = (x.colwise() - mean).array().colwise() * inv.array();
    return z.cwiseMax(-clip).cwiseMin(clip);
  }
};

// Scales rewards by the running std of the discounted return.
struct RewardScaler {
  RunningMeanStd rms{1};
  VecX ret;
  double gamma = 0.99;

  RewardScaler() = default;
  RewardScaler(int envs, double g) : ret(VecX::Zero(envs)), gamma(g) {}

  VecX scale(const VecX& r, const std::vector<bool>& done) {
    ret = ret * gamma + r;
    rms.update(ret.transpose());
    const VecX out = r / std::sqrt(rms.var[0] + 1e-8);
    for (Eigen::Index e = 0; e < ret.size(); ++e)
      if (done[e]) ret[e] = 0;
    return out.cwiseMax(-10.0).cwiseMin(10.0);
  }
};

inline nlohmann::json to_json(const RunningMeanStd& r) {
  return {{"mean", std::vector<double>(r.mean.data(), r.mean.data() + r.mean.size())},
          {"var", std::vector<double>(r.var.data(), r.var.data() + r.var.size())},
          {"count", r.count}};
}

inline RunningMeanStd rms_from_json(const nlohmann::json& j) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto v = j.at("var").get<std::vector<double>>();
  if (m.size() != v.size()) throw std::invalid_argument("normalizer mean/var size mismatch");
  RunningMeanStd r(static_cast<int>(m.size()));
  r.mean = Eigen::Map<const VecX>(m.data(), m.size());
  r.var = Eigen::Map<const VecX>(v.data(), v.size());
  r.count = j.at("count").get<double>();
  return r;
}

}  // namespace signkit::learn
