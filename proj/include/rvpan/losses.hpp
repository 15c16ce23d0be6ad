// Copyright 2026 The rvpan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Training losses as plain scalar reductions over dense Eigen inputs.
//
// Class probabilities are stored as a (pixels x classes) row-major matrix with
// pixels in row-major image order. Ground truth is one class id per pixel and
// an optional validity mask (empty means every pixel counts).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rvpan/types.hpp"

namespace rvpan::loss {

template <typename Scalar>
using ProbMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ValidMask = Eigen::Array<bool, Eigen::Dynamic, 1>;

inline constexpr double kLogEpsilon = 1e-8;

struct LossWeights {
  double semantic = 1.0;        // beta1
  double embedding = 0.1;       // beta2
  double instance_seg = 0.2;    // beta3
  double wce = 1.0;
  double lovasz = 1.5;
  double tv = 7.5;
};

struct LossParts {
  double semantic = 0.0;
  double embedding = 0.0;
  double instance_seg = 0.0;
};

namespace detail {

inline bool IsValid(const ValidMask& valid, Index i) { return valid.size() == 0 || valid(i); }

template <typename Scalar>
void CheckLabels(const ProbMatrix<Scalar>& probs, const Eigen::VectorXi& gt, const ValidMask& valid) {
  if (gt.size() != probs.rows()) {
    throw Error(ErrorCode::kShapeError, "ground truth has " + std::to_string(gt.size()) +
                                            " pixels, prediction has " +
                                            std::to_string(probs.rows()));
  }
  if (valid.size() != 0 && valid.size() != probs.rows()) {
    throw Error(ErrorCode::kShapeError, "validity mask length differs from prediction");
  }
  for (Index i = 0; i < gt.size(); ++i) {
    if (!IsValid(valid, i)) continue;
    if (gt(i) < 0 || gt(i) >= probs.cols()) {
      throw Error(ErrorCode::kLabelError, "class " + std::to_string(gt(i)) + " at pixel " +
                                              std::to_string(i) + " outside [0, " +
                                              std::to_string(probs.cols()) + ")");
    }
  }
}

}  // namespace detail

/// Mean over valid pixels of -w[gt] * log(max(p[gt], eps)). The floor keeps
/// log(0) finite without biasing well-conditioned probabilities.
template <typename Scalar>
Scalar WeightedCrossEntropy(const ProbMatrix<Scalar>& probs, const Eigen::VectorXi& gt,
                            const Eigen::Array<Scalar, Eigen::Dynamic, 1>& class_weights,
                            const ValidMask& valid = {}) {
  detail::CheckLabels(probs, gt, valid);
  if (class_weights.size() != probs.cols()) {
    throw Error(ErrorCode::kShapeError, "one weight per class required");
  }
  Scalar total(0);
  Index count = 0;
  for (Index i = 0; i < probs.rows(); ++i) {
    if (!detail::IsValid(valid, i)) continue;
    const Scalar p = std::clamp<Scalar>(probs(i, gt(i)), Scalar(kLogEpsilon), Scalar(1));
    total += -class_weights(gt(i)) * std::log(p);
    ++count;
  }
  return count == 0 ? Scalar(0) : total / static_cast<Scalar>(count);
}

/// w_c = 1 / log(1.02 + freq_c), frequencies normalized to sum to one.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> InverseLogFrequencyWeights(
    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& counts) {
  const Scalar total = counts.sum();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> w(counts.size());
  for (Index c = 0; c < counts.size(); ++c) {
    const Scalar freq = total > Scalar(0) ? counts(c) / total : Scalar(0);
    w(c) = Scalar(1) / std::log(Scalar(1.02) + freq);
  }
  return w;
}

/// Discrete gradient of the Jaccard loss along an ordering of the elements;
/// `sorted_gt` holds the 0/1 labels in that order.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> LovaszGrad(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& sorted_gt) {
  const Index n = sorted_gt.size();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> jaccard(n);
  const Scalar gts = sorted_gt.sum();
  Scalar cum_pos(0);
  Scalar cum_neg(0);
  for (Index i = 0; i < n; ++i) {
    cum_pos += sorted_gt(i);
    cum_neg += Scalar(1) - sorted_gt(i);
    const Scalar intersection = gts - cum_pos;
    const Scalar uni = gts + cum_neg;
    jaccard(i) = uni > Scalar(0) ? Scalar(1) - intersection / uni : Scalar(0);
  }
  for (Index i = n - 1; i > 0; --i) jaccard(i) -= jaccard(i - 1);
  return jaccard;
}

/// Lovasz extension of the Jaccard loss for one binary problem, evaluated at
/// the per-element errors. Errors are sorted in decreasing order; equal errors
/// keep their original order.
template <typename Scalar>
Scalar LovaszExtension(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& errors,
                       const Eigen::Array<Scalar, Eigen::Dynamic, 1>& labels) {
  const Index n = errors.size();
  if (n == 0) return Scalar(0);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return errors(a) > errors(b); });
  Eigen::Array<Scalar, Eigen::Dynamic, 1> sorted_err(n), sorted_gt(n);
  for (Index i = 0; i < n; ++i) {
    sorted_err(i) = errors(order[i]);
    sorted_gt(i) = labels(order[i]);
  }
  return (sorted_err * LovaszGrad<Scalar>(sorted_gt)).sum();
}

/// Multi-class Lovasz-softmax, averaged over the classes present in the valid
/// ground truth.
template <typename Scalar>
Scalar LovaszSoftmax(const ProbMatrix<Scalar>& probs, const Eigen::VectorXi& gt,
                     const ValidMask& valid = {}) {
  detail::CheckLabels(probs, gt, valid);
  std::vector<Index> pixels;
  pixels.reserve(static_cast<std::size_t>(probs.rows()));
  for (Index i = 0; i < probs.rows(); ++i) {
    if (detail::IsValid(valid, i)) pixels.push_back(i);
  }
  const Index n = static_cast<Index>(pixels.size());
  Scalar total(0);
  int present = 0;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> errors(n), labels(n);
  for (Index c = 0; c < probs.cols(); ++c) {
    bool any = false;
    for (Index k = 0; k < n; ++k) {
      const Index i = pixels[k];
      const bool fg = gt(i) == c;
      any = any || fg;
      labels(k) = fg ? Scalar(1) : Scalar(0);
      errors(k) = std::abs(labels(k) - probs(i, c));
    }
    if (!any) continue;
    total += LovaszExtension<Scalar>(errors, labels);
    ++present;
  }
  return present == 0 ? Scalar(0) : total / static_cast<Scalar>(present);
}

/// Anisotropic L1 total variation of the error map
///   e[i,j] = sum_c |p[i,j,c] - onehot(gt[i,j])_c|,
/// averaged over the (H-1)(W-1) pixels that have both a lower and a right
/// neighbour. Zero when either dimension is below 2.
template <typename Scalar>
Scalar TotalVariation(const ProbMatrix<Scalar>& probs, const Eigen::VectorXi& gt, Index height,
                      Index width) {
  if (probs.rows() != height * width || gt.size() != probs.rows()) {
    throw Error(ErrorCode::kShapeError, "prediction, ground truth and image size disagree");
  }
  detail::CheckLabels(probs, gt, ValidMask{});
  Image<Scalar> err(height, width);
  for (Index i = 0; i < probs.rows(); ++i) {
    Scalar e = probs.row(i).cwiseAbs().sum();
    const Scalar p_gt = probs(i, gt(i));
    e += std::abs(p_gt - Scalar(1)) - std::abs(p_gt);
    err.data()[i] = e;
  }
  if (height < 2 || width < 2) return Scalar(0);
  Scalar total(0);
  for (Index i = 0; i + 1 < height; ++i) {
    for (Index j = 0; j + 1 < width; ++j) {
      total += std::abs(err(i + 1, j) - err(i, j)) + std::abs(err(i, j + 1) - err(i, j));
    }
  }
  return total / static_cast<Scalar>((height - 1) * (width - 1));
}

/// wce + 1.5 * lovasz + 7.5 * tv (mixing coefficients from LossWeights).
template <typename Scalar>
Scalar SemanticLoss(const ProbMatrix<Scalar>& probs, const Eigen::VectorXi& gt,
                    const Eigen::Array<Scalar, Eigen::Dynamic, 1>& class_weights, Index height,
                    Index width, const ValidMask& valid = {}, const LossWeights& mix = {}) {
  return static_cast<Scalar>(mix.wce) * WeightedCrossEntropy<Scalar>(probs, gt, class_weights, valid) +
         static_cast<Scalar>(mix.lovasz) * LovaszSoftmax<Scalar>(probs, gt, valid) +
         static_cast<Scalar>(mix.tv) * TotalVariation<Scalar>(probs, gt, height, width);
}

/// Sum over masked pixels of the Euclidean distance between predicted and
/// ground-truth embeddings. `mean_normalized` divides by the mask count.
template <typename Scalar>
Scalar EmbeddingLoss(const Embedding2<Scalar>& pred, const Embedding2<Scalar>& gt,
                     const ValidMask& mask, bool mean_normalized = false) {
  if (pred.rows() != gt.rows() || mask.size() != pred.rows()) {
    throw Error(ErrorCode::kShapeError, "embedding loss inputs differ in length");
  }
  Scalar total(0);
  Index count = 0;
  for (Index i = 0; i < pred.rows(); ++i) {
    if (!mask(i)) continue;
    total += (gt.row(i) - pred.row(i)).norm();
    ++count;
  }
  if (mean_normalized && count > 0) total /= static_cast<Scalar>(count);
  return total;
}

struct PillarGt {
  std::vector<std::int32_t> labels;  // modal ground-truth instance per pillar
  BoolMatrix same_instance;          // labels[i] == labels[j]
};

/// Modal instance id per pillar (smallest id on ties) and the pairwise
/// equality matrix.
inline PillarGt BuildPillarGt(const std::vector<std::vector<Index>>& members,
                              const std::vector<std::int32_t>& gt_instance) {
  PillarGt out;
  out.labels.reserve(members.size());
  for (const auto& pillar : members) {
    if (pillar.empty()) throw Error(ErrorCode::kShapeError, "pillar without members");
    std::map<std::int32_t, std::size_t> counts;
    for (Index p : pillar) {
      if (p < 0 || static_cast<std::size_t>(p) >= gt_instance.size()) {
        throw Error(ErrorCode::kShapeError, "pillar member outside the ground truth");
      }
      ++counts[gt_instance[static_cast<std::size_t>(p)]];
    }
    std::int32_t best = counts.begin()->first;
    std::size_t best_n = 0;
    for (const auto& [id, n] : counts) {
      if (n > best_n) {
        best = id;
        best_n = n;
      }
    }
    out.labels.push_back(best);
  }
  const Index m = static_cast<Index>(out.labels.size());
  out.same_instance.resize(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) out.same_instance(i, j) = out.labels[i] == out.labels[j];
  }
  return out;
}

/// Mean binary cross entropy with probabilities clamped to [eps, 1 - eps].
template <typename Scalar>
Scalar BinaryCrossEntropy(const SquareMatrix<Scalar>& pred, const BoolMatrix& gt) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
    throw Error(ErrorCode::kShapeError, "pairwise prediction and ground truth differ in shape");
  }
  if (pred.size() == 0) return Scalar(0);
  const Scalar eps(kLogEpsilon);
  Scalar total(0);
  for (Index j = 0; j < pred.cols(); ++j) {
    for (Index i = 0; i < pred.rows(); ++i) {
      const Scalar p = std::clamp(pred(i, j), eps, Scalar(1) - eps);
      total += gt(i, j) ? -std::log(p) : -std::log(Scalar(1) - p);
    }
  }
  return total / static_cast<Scalar>(pred.size());
}

/// BCE plus the binary Lovasz extension over the flattened (column-major)
/// matrix, with |pred - gt| as the error and gt as the positive set.
template <typename Scalar>
Scalar InstanceSegLoss(const SquareMatrix<Scalar>& pred, const BoolMatrix& gt) {
  const Scalar bce = BinaryCrossEntropy<Scalar>(pred, gt);
  const Index n = pred.size();
  Eigen::Array<Scalar, Eigen::Dynamic, 1> errors(n), labels(n);
  for (Index k = 0; k < n; ++k) {
    labels(k) = gt.data()[k] ? Scalar(1) : Scalar(0);
    errors(k) = std::abs(pred.data()[k] - labels(k));
  }
  return bce + LovaszExtension<Scalar>(errors, labels);
}

inline double TotalLoss(const LossParts& parts, const LossWeights& w = {}) {
  return w.semantic * parts.semantic + w.embedding * parts.embedding +
         w.instance_seg * parts.instance_seg;
}

}  // namespace rvpan::loss
