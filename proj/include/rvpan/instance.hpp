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

// Cluster-free instance segmentation over 2D (bird's-eye) embeddings.
//
// Foreground points are grouped into pillars by flooring their embedding onto
// a grid of size d. Pillars are compared pairwise with
//
//   f(p, q) = exp(-alpha * |p - q|),
//
// which is 1 on the diagonal, symmetric and in (0, 1]. Entries strictly above
// the threshold T form an adjacency matrix whose connected components are the
// instances.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "rvpan/projection.hpp"
#include "rvpan/types.hpp"

namespace rvpan {

/// Per-pixel 2D instance embedding and the foreground mask it is read through.
struct EmbeddingMap {
  ImageD ex;
  ImageD ey;
  Mask foreground;

  int height() const { return static_cast<int>(ex.rows()); }
  int width() const { return static_cast<int>(ex.cols()); }
};

/// Foreground embeddings flattened in row-major pixel order.
struct ForegroundEmbedding {
  Embedding2<double> points;
  std::vector<PixelIndex> pixels;  // back-index into the image

  Index size() const { return points.rows(); }
};

struct FixedAlpha {
  double alpha = 2.5;
};
struct DerivedAlpha {};

struct InstanceParams {
  double grid_size = 0.15;
  double threshold = 0.5;
  std::variant<FixedAlpha, DerivedAlpha> alpha_mode = DerivedAlpha{};

  /// Grid 0.15 m, threshold 0.5, alpha fixed at 2.5.
  static InstanceParams FixedPreset() { return {0.15, 0.5, FixedAlpha{2.5}}; }

  void Validate() const;
  double alpha() const;
};

/// alpha = -ln(T) / (2 d): pillars whose centers are at most 2d apart score
/// at least T. Throws InvalidParams unless 0 < T < 1 and d > 0.
double DeriveAlpha(double threshold, double grid_size);

/// 1 where the semantic label is a thing class.
Mask ForegroundMask(const Image<std::int32_t>& semantic, const std::vector<std::int32_t>& thing_set);

/// G2 = P_xy + O_xy: per-pixel xy coordinates plus predicted offsets.
EmbeddingMap ComposeEmbedding(const RangeImage& ri, const ImageD& offset_x, const ImageD& offset_y,
                              const Mask& foreground);

ForegroundEmbedding FlattenForeground(const EmbeddingMap& embedding);

struct Pillars {
  Embedding2<double> centers;               // M x 2 mean embedding
  std::vector<std::vector<Index>> members;  // point indices per pillar
  std::vector<Index> point_to_pillar;

  Index size() const { return centers.rows(); }
};

/// Groups points by grid cell (floor(x / d), floor(y / d)). Pillars are
/// numbered in order of their first member.
Pillars Pillarize(const Eigen::Ref<const Embedding2<double>>& embeddings, double grid_size);

/// Connectivity f = exp(-alpha * distance) between pillar centers.
template <typename Scalar>
SquareMatrix<Scalar> PairwiseMatrix(const Eigen::Ref<const Embedding2<Scalar>>& centers,
                                    Scalar alpha) {
  const Index m = centers.rows();
  SquareMatrix<Scalar> out(m, m);
  for (Index i = 0; i < m; ++i) {
    out(i, i) = Scalar(1);
    for (Index j = i + 1; j < m; ++j) {
      const Scalar f = std::exp(-alpha * (centers.row(i) - centers.row(j)).norm());
      out(i, j) = f;
      out(j, i) = f;
    }
  }
  return out;
}

/// adjacency = (pairwise > T), diagonal forced true.
template <typename Scalar>
BoolMatrix ThresholdAdjacency(const SquareMatrix<Scalar>& pairwise, Scalar threshold) {
  BoolMatrix out = (pairwise.array() > threshold).matrix();
  out.diagonal().setConstant(true);
  return out;
}

/// Component label (1..K) per node; labels follow the smallest member index.
std::vector<std::int32_t> ConnectedComponents(const BoolMatrix& adjacency);

/// Instance id image: each foreground pixel takes its pillar's component.
Image<std::int32_t> AssignInstanceIds(const std::vector<std::int32_t>& components,
                                      const Pillars& pillars,
                                      const std::vector<PixelIndex>& back_index, int height,
                                      int width);

struct PillarGraph {
  Pillars pillars;
  SquareMatrix<double> pairwise;
  BoolMatrix adjacency;
  std::vector<std::int32_t> components;
  double alpha = 0.0;

  Index num_pillars() const { return pillars.size(); }
  std::int32_t num_instances() const;
};

struct InstanceResult {
  Image<std::int32_t> instance_ids;
  PillarGraph graph;
};

/// Pillarize, compare, threshold, label, and map labels back to pixels.
InstanceResult SegmentInstances(const EmbeddingMap& embedding, const InstanceParams& params);

/// Same pipeline over already flattened embeddings; returns one id per point.
std::vector<std::int32_t> SegmentPoints(const Eigen::Ref<const Embedding2<double>>& embeddings,
                                        const InstanceParams& params,
                                        PillarGraph* graph = nullptr);

}  // namespace rvpan
