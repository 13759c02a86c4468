#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "signkit/core/motion.hpp"
#include "signkit/core/robot_model.hpp"

namespace signkit::vq {

enum Part { kUpperBody = 0, kLeftHand = 1, kRightHand = 2, kPartCount = 3 };
inline constexpr std::array<const char*, kPartCount> kPartNames{"ub", "lh", "rh"};

// Disjoint DoF index sets whose union is the model's upper partition.
struct PartSplit {
  std::array<std::vector<int>, kPartCount> parts;

  void validate(const RobotModel& m) const {
    std::vector<int> seen(m.dof_count(), 0);
    std::size_t total = 0;
    for (const auto& p : parts) {
      if (p.empty()) throw std::invalid_argument("part split: empty part");
      for (int i : p) {
        if (i < 0 || i >= static_cast<int>(m.dof_count())) throw std::invalid_argument("part split: DoF index out of range");
        if (seen[i]++) throw std::invalid_argument("part split: DoF " + m.dofs[i].name + " in two parts");
      }
      total += p.size();
    }
    for (int i : m.upper)
      if (!seen[i]) throw std::invalid_argument("part split: upper DoF " + m.dofs[i].name + " not covered");
    if (total != m.upper.size()) throw std::invalid_argument("part split: covers DoFs outside the upper partition");
  }
};

// UB = torso, arms and wrists; LH/RH = the finger DoFs of each hand.
inline PartSplit default_split(const RobotModel& m) {
  PartSplit s;
  for (int i : m.upper) {
    const Dof& d = m.dofs[i];
    if (d.group != DofGroup::Finger) s.parts[kUpperBody].push_back(i);
    else if (d.name.rfind("left_", 0) == 0) s.parts[kLeftHand].push_back(i);
    else if (d.name.rfind("right_", 0) == 0) s.parts[kRightHand].push_back(i);
    else throw std::invalid_argument("default split: finger DoF " + d.name + " has no side prefix");
  }
  s.validate(m);
  return s;
}

struct Codebook {
  MatX codes;  // one code per row

  int size() const { return static_cast<int>(codes.rows()); }
  int dim() const { return static_cast<int>(codes.cols()); }

  void validate() const {
    if (codes.rows() == 0 || codes.cols() == 0) throw std::invalid_argument("codebook is empty");
    if (!codes.allFinite()) throw std::invalid_argument("codebook has non-finite codes");
    for (Eigen::Index a = 0; a < codes.rows(); ++a)
      for (Eigen::Index b = a + 1; b < codes.rows(); ++b)
        if ((codes.row(a) - codes.row(b)).squaredNorm() <= 1e-24)
          throw std::invalid_argument("codebook has duplicate codes " + std::to_string(a) + " and " + std::to_string(b));
  }
};

// Exact squared-Euclidean nearest code; ties go to the lowest index.
inline int quantize(const Codebook& cb, const Eigen::Ref<const VecX>& x) {
  if (cb.size() == 0) throw std::invalid_argument("quantize: empty codebook");
  if (x.size() != cb.dim())
    throw std::invalid_argument("quantize: frame has " + std::to_string(x.size()) + " values, codebook expects " +
                                std::to_string(cb.dim()));
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int n = 0; n < cb.size(); ++n) {
    const double d = (cb.codes.row(n).transpose() - x).squaredNorm();
    if (d < best_d) best_d = d, best = n;
  }
  return best;
}

// frames: one frame per row.
inline std::vector<int> quantize_all(const Codebook& cb, const MatX& frames) {
  std::vector<int> out(frames.rows());
  for (Eigen::Index r = 0; r < frames.rows(); ++r) out[r] = quantize(cb, frames.row(r).transpose());
  return out;
}

// Mean over frames of the squared distance to the assigned code.
inline double distortion(const Codebook& cb, const MatX& frames, const std::vector<int>& tokens) {
  if (static_cast<Eigen::Index>(tokens.size()) != frames.rows())
    throw std::invalid_argument("distortion: token count differs from frame count");
  if (tokens.empty()) return 0.0;
  double s = 0;
  for (Eigen::Index r = 0; r < frames.rows(); ++r) s += (frames.row(r) - cb.codes.row(tokens[r])).squaredNorm();
  return s / static_cast<double>(frames.rows());
}

struct FitOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // stop when the relative distortion improvement drops below this
};

struct FitResult {
  Codebook codebook;
  std::vector<double> distortion;  // after seeding, then after every Lloyd iteration
  int iterations = 0;
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters are re-seeded
// from the frame farthest from its current code.
inline FitResult fit_codebook(const MatX& frames, int nz, std::uint64_t seed, const FitOptions& opt = {}) {
  const Eigen::Index M = frames.rows(), d = frames.cols();
  if (nz < 1) throw std::invalid_argument("fit_codebook: codebook size must be positive");
  if (M < nz)
    throw std::invalid_argument("fit_codebook: " + std::to_string(M) + " frames for " + std::to_string(nz) + " codes");
  if (d == 0) throw std::invalid_argument("fit_codebook: frames have no features");
  if (!frames.allFinite()) throw std::invalid_argument("fit_codebook: non-finite frame values");

  std::mt19937_64 rng(seed);
  Codebook cb;
  cb.codes.resize(nz, d);
  VecX d2(M);
  const Eigen::Index first = std::uniform_int_distribution<Eigen::Index>(0, M - 1)(rng);
  cb.codes.row(0) = frames.row(first);
  for (Eigen::Index r = 0; r < M; ++r) d2[r] = (frames.row(r) - cb.codes.row(0)).squaredNorm();
  for (int k = 1; k < nz; ++k) {
    const double total = d2.sum();
    if (!(total > 0)) throw std::invalid_argument("fit_codebook: fewer distinct frames than codes");
    double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    Eigen::Index pick = -1;
    for (Eigen::Index r = 0; r < M; ++r) {
      if (d2[r] <= 0) continue;
      pick = r;
      if ((u -= d2[r]) < 0) break;
    }
    cb.codes.row(k) = frames.row(pick);
    for (Eigen::Index r = 0; r < M; ++r) d2[r] = std::min(d2[r], (frames.row(r) - cb.codes.row(k)).squaredNorm());
  }

  FitResult res;
  std::vector<int> tok = quantize_all(cb, frames);
  res.distortion.push_back(distortion(cb, frames, tok));
  for (int it = 0; it < opt.max_iterations && res.distortion.back() > 0; ++it) {
    MatX sum = MatX::Zero(nz, d);
    std::vector<int> count(nz, 0);
    for (Eigen::Index r = 0; r < M; ++r) sum.row(tok[r]) += frames.row(r), ++count[tok[r]];
    for (int k = 0; k < nz; ++k)
      if (count[k]) cb.codes.row(k) = sum.row(k) / static_cast<double>(count[k]);
    for (int k = 0; k < nz; ++k) {
      if (count[k]) continue;
      Eigen::Index far = 0;
      double far_d = -1;
      for (Eigen::Index r = 0; r < M; ++r) {
        const double e = (frames.row(r) - cb.codes.row(tok[r])).squaredNorm();
        if (e > far_d) far_d = e, far = r;
      }
      cb.codes.row(k) = frames.row(far);
      tok[far] = k;
    }
    tok = quantize_all(cb, frames);
    const double prev = res.distortion.back(), cur = distortion(cb, frames, tok);
    if (cur > prev * (1 + 1e-12) + 1e-300)
      throw std::logic_error("fit_codebook: distortion increased from " + std::to_string(prev) + " to " +
                             std::to_string(cur));
    res.distortion.push_back(cur);
    res.iterations = it + 1;
    if (prev - cur <= opt.tolerance * prev) break;
  }
  res.codebook = std::move(cb);
  return res;
}

using Codebooks = std::array<Codebook, kPartCount>;
using PartTokens = std::array<std::vector<int>, kPartCount>;

// Frames of one part, one row per trajectory frame.
inline MatX part_frames(const RobotTrajectory& t, const std::vector<int>& idx) {
  MatX out(static_cast<Eigen::Index>(t.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t f = 0; f < t.size(); ++f) {
    const VecX& q = t.frames[f].q;
    for (std::size_t c = 0; c < idx.size(); ++c) {
      if (idx[c] < 0 || idx[c] >= q.size())
        throw std::invalid_argument("part split index " + std::to_string(idx[c]) + " outside trajectory DoFs");
      out(f, c) = q[idx[c]];
    }
  }
  return out;
}

inline void check_codebooks(const Codebooks& cbs, const PartSplit& split) {
  for (int p = 0; p < kPartCount; ++p) {
    if (cbs[p].size() == 0) throw std::invalid_argument(std::string("empty codebook for part ") + kPartNames[p]);
    if (cbs[p].dim() != static_cast<int>(split.parts[p].size()))
      throw std::invalid_argument(std::string("codebook for part ") + kPartNames[p] + " has dimension " +
                                  std::to_string(cbs[p].dim()) + ", split has " +
                                  std::to_string(split.parts[p].size()));
  }
}

inline PartTokens tokenize_clip(const RobotTrajectory& t, const PartSplit& split, const Codebooks& cbs) {
  check_codebooks(cbs, split);
  PartTokens out;
  for (int p = 0; p < kPartCount; ++p) out[p] = quantize_all(cbs[p], part_frames(t, split.parts[p]));
  return out;
}

// Code lookup per part; rows are frames.
inline MatX reconstruct(const Codebook& cb, const std::vector<int>& tokens) {
  MatX out(static_cast<Eigen::Index>(tokens.size()), cb.dim());
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k] < 0 || tokens[k] >= cb.size()) throw std::invalid_argument("token out of codebook range");
    out.row(k) = cb.codes.row(tokens[k]);
  }
  return out;
}

// Per-part mean squared frame distance between the clip and its reconstruction.
inline std::array<double, kPartCount> reconstruction_error(const RobotTrajectory& t, const PartSplit& split,
                                                           const Codebooks& cbs, const PartTokens& tok) {
  std::array<double, kPartCount> out{};
  for (int p = 0; p < kPartCount; ++p) {
    const MatX x = part_frames(t, split.parts[p]);
    if (x.rows() != static_cast<Eigen::Index>(tok[p].size()))
      throw std::invalid_argument("reconstruction: token count differs from frame count");
    out[p] = x.rows() ? (x - reconstruct(cbs[p], tok[p])).rowwise().squaredNorm().mean() : 0.0;
  }
  return out;
}

struct CodebookStats {
  double utilization = 0;  // distinct tokens / N_Z
  double perplexity = 0;   // exp of the empirical token entropy
};

inline CodebookStats codebook_stats(const std::vector<int>& tokens, int nz) {
  if (tokens.empty()) throw std::invalid_argument("codebook stats need at least one token");
  std::vector<double> count(nz, 0.0);
  for (int t : tokens) {
    if (t < 0 || t >= nz) throw std::invalid_argument("token " + std::to_string(t) + " outside codebook");
    count[t] += 1;
  }
  const double n = static_cast<double>(tokens.size());
  double h = 0;
  int distinct = 0;
  for (double c : count)
    if (c > 0) {
      ++distinct;
      h -= (c / n) * std::log(c / n);
    }
  return {distinct / static_cast<double>(nz), std::exp(h)};
}

struct TokenizerConfig {
  std::array<int, kPartCount> codebook_size{256, 128, 128};
  FitOptions fit;
  std::uint64_t seed = 0;
};

// Fits each part on the pooled frames of every clip; part p uses seed + p.
inline Codebooks fit_codebooks(const std::vector<RobotTrajectory>& corpus, const PartSplit& split,
                               const TokenizerConfig& cfg, std::array<FitResult, kPartCount>* details = nullptr) {
  if (corpus.empty()) throw std::invalid_argument("tokenizer: empty corpus");
  Codebooks out;
  for (int p = 0; p < kPartCount; ++p) {
    std::vector<MatX> blocks;
    Eigen::Index rows = 0;
    for (const auto& t : corpus) blocks.push_back(part_frames(t, split.parts[p])), rows += blocks.back().rows();
    MatX all(rows, static_cast<Eigen::Index>(split.parts[p].size()));
    Eigen::Index r = 0;
    for (const auto& b : blocks) all.middleRows(r, b.rows()) = b, r += b.rows();
    FitResult fr = fit_codebook(all, cfg.codebook_size[p], cfg.seed + p, cfg.fit);
    out[p] = fr.codebook;
    if (details) (*details)[p] = std::move(fr);
  }
  return out;
}

inline nlohmann::json to_json(const Codebooks& cbs) {
  nlohmann::json j = nlohmann::json::object();
  for (int p = 0; p < kPartCount; ++p) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < cbs[p].codes.rows(); ++r) {
      std::vector<double> row(cbs[p].codes.cols());
      for (Eigen::Index c = 0; c < cbs[p].codes.cols(); ++c) row[c] = cbs[p].codes(r, c);
      rows.push_back(std::move(row));
    }
    j[kPartNames[p]]["codes"] = std::move(rows);
  }
  return j;
}

inline Codebooks codebooks_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("codebook file must be an object");
  for (const auto& [k, v] : j.items())
    if (k != "ub" && k != "lh" && k != "rh") throw std::invalid_argument("codebook file: unknown part '" + k + "'");
  Codebooks out;
  for (int p = 0; p < kPartCount; ++p) {
    if (!j.contains(kPartNames[p])) throw std::invalid_argument(std::string("codebook file: missing part ") + kPartNames[p]);
    const auto& rows = j.at(kPartNames[p]).at("codes");
    if (!rows.is_array() || rows.empty()) throw std::invalid_argument(std::string("codebook part ") + kPartNames[p] + " is empty");
    const std::size_t d = rows[0].size();
    MatX c(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto v = rows[r].get<std::vector<double>>();
      if (v.size() != d) throw std::invalid_argument(std::string("codebook part ") + kPartNames[p] + ": ragged codes");
      for (std::size_t k = 0; k < d; ++k) c(r, k) = v[k];
    }
    out[p].codes = std::move(c);
    out[p].validate();
  }
  return out;
}

// CSV with header frame,ub,lh,rh.
inline std::string tokens_csv(const PartTokens& tok) {
  const std::size_t K = tok[0].size();
  if (tok[1].size() != K || tok[2].size() != K) throw std::invalid_argument("token streams differ in length");
  std::ostringstream os;
  os << "frame,ub,lh,rh\n";
  for (std::size_t k = 0; k < K; ++k) os << k << ',' << tok[0][k] << ',' << tok[1][k] << ',' << tok[2][k] << '\n';
  return os.str();
}

}  // namespace signkit::vq
